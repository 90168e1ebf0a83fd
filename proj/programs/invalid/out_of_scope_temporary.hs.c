// expect: OUT_OF_SCOPE
double a[1024];
double b[1024];

void Pair()
{
    #pragma hstream in(a) out(b)
    {
        double t = a+1;
        b = t;
    }
    #pragma hstream in(b) out(a)
    {
        a = b*t;
    }
}
