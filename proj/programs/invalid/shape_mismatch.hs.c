// expect: SHAPE_MISMATCH
double a[1024];
double b[2048];

void Copy()
{
    #pragma hstream in(b) out(a)
    {
        a = b;
    }
}
