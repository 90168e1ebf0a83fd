// expect: UNDECLARED
double a[1024];

void Fill()
{
    #pragma hstream in(alpha) out(a)
    {
        a = 1.0;
    }
}
