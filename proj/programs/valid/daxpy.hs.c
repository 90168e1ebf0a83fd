double x[65536];
double y[65536];
double scalar = 2.0;

void Daxpy()
{
    #pragma hstream in(x,scalar) inout(y)
    {
        y = y+scalar*x;
    }
}
