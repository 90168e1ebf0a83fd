// expect: DUP_DECLARATION
double a[1024];

void Twice()
{
    #pragma hstream in(a) out(a)
    {
        double t = a;
        double t = a * 2;
        a = t;
    }
}
