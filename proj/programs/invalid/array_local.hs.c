// expect: INVALID_LOCAL
double a[1024];

void Temp()
{
    #pragma hstream in(a) out(a)
    {
        double t[4];
        a = a;
    }
}
