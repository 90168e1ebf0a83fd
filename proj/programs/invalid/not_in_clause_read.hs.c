// expect: NOT_IN_CLAUSE
double a[1024];
double b[1024];
double c[1024];

void Add()
{
    #pragma hstream in(a) out(c)
    {
        c = a+b;
    }
}
