double a[65536];
double b[65536];
double c[65536];
double scalar = 3.0;

void Triad()
{
    #pragma hstream in(b,c,a,scalar) out(a) device(*) scheduling(4096)
    {
        a = b+scalar*c;
    }
}
