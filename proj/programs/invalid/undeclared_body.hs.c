// expect: UNDECLARED
double a[1024];
double b[1024];

void Add()
{
    #pragma hstream in(b) out(a)
    {
        a = b + d;
    }
}
