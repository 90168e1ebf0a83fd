/*
 * Heterogeneous STREAM benchmark: the COPY, SCALE, ADD and TRIAD kernels of
 * STREAM plus FILL and DAXPY from STREAM2. Every kernel is distributed over
 * all processing units listed in the platform description.
 */

double a[2000000];
double b[2000000];
double c[2000000];
double x[2000000];
double y[2000000];
double scalar = 3.0;

void Init()
{
    #pragma hstream out(a,b,c,x,y)
    {
        a = 1.0;
        b = 2.0;
        c = 0.0;
        x = 1.0;
        y = 2.0;
    }
}

// Touch every page once before timing, like the reference benchmark does.
void Warmup()
{
    #pragma hstream inout(a)
    {
        a = 2.0*a;
    }
}

void Copy()
{
    #pragma hstream in(a) out(c)
    {
        c = a;
    }
}

void Scale()
{
    #pragma hstream in(c,scalar) out(b)
    {
        b = scalar*c;
    }
}

void Add()
{
    #pragma hstream in(a,b) out(c)
    {
        c = a+b;
    }
}

void Triad()
{
    #pragma hstream in(b,c,a,scalar) out(a) device(*) scheduling(4096)
    {
        a = b+scalar*c;
    }
}

void Fill()
{
    #pragma hstream in(scalar) out(a)
    {
        a = scalar;
    }
}

void Daxpy()
{
    #pragma hstream in(x,y,scalar) out(y)
    {
        y = y+scalar*x;
    }
}
