// expect: INVALID_TARGET
double a[1024];
double total = 0.0;

void Accumulate()
{
    #pragma hstream in(a,total) out(a)
    {
        total = total+a;
    }
}
