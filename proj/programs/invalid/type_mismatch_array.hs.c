// expect: TYPE_MISMATCH
int n[1024];
double x[1024];

void Truncate()
{
    #pragma hstream in(x) out(n)
    {
        n = x * 2;
    }
}
