// expect: DUP_DEVICE
double a[1024];
double b[1024];

void Copy()
{
    #pragma hstream in(b) out(a) device(0,1) device(2)
    {
        a = b;
    }
}
