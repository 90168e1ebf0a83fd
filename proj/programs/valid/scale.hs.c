double a[65536];
double b[65536];
double scalar = 3.0;

void Scale()
{
    #pragma hstream in(b,scalar) out(a) scheduling(AUTO)
    {
        a = scalar*b;
    }
}
