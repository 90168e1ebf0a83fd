// expect: UNINITIALIZED
double a[1024];

void Use()
{
    #pragma hstream in(a) out(a)
    {
        double t;
        a = a+t;
    }
}
