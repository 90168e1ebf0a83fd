// TRIAD kernel of the STREAM benchmark, spread over every processing unit.

double a[1048576];
double b[1048576];
double c[1048576];
double scalar = 3.0;

void Triad()
{
    #pragma hstream in(b,c,a,scalar) out(a) device(*) scheduling(4096)
    {
        a = b+scalar*c;
    }
}
