double a[65536];
double b[65536];

void Copy()
{
    #pragma hstream in(b) out(a)
    {
        a = b;
    }
}
