// expect: OUT_OF_SCOPE
double a[1024];

void Setup()
{
    double factor = 4.0;
}

void Scale()
{
    #pragma hstream in(a,factor) out(a)
    {
        a = factor*a;
    }
}
