double a[65536];
double b[65536];
double c[65536];

void Add()
{
    // Clauses may repeat; the lists are merged.
    #pragma hstream in(a) in(b) out(c) device(0,1)
    {
        c = a+b;
    }
}
