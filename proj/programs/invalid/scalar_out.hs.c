// expect: BAD_CLAUSE_REF
double a[1024];
double total = 0.0;

void Sum()
{
    #pragma hstream in(a) out(a,total)
    {
        a = a+1;
    }
}
