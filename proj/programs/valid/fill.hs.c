double a[65536];
double scalar = 7.0;

void Fill()
{
    #pragma hstream in(scalar) out(a) scheduling(0:8192,1:32768) device(0,1)
    {
        a = scalar;
    }
}
