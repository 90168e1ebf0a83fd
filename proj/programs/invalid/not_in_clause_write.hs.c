// expect: NOT_IN_CLAUSE
double a[1024];
double b[1024];

void Copy()
{
    #pragma hstream in(a,b)
    {
        b = a;
    }
}
