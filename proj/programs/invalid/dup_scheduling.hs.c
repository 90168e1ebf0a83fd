// expect: DUP_SCHEDULING
double a[1024];
double b[1024];

void Copy()
{
    #pragma hstream in(b) out(a) scheduling(4096) scheduling(AUTO)
    {
        a = b;
    }
}
