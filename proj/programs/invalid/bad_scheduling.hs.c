// expect: BAD_SCHEDULING
double a[1024];

void Fill()
{
    #pragma hstream out(a) device(0,1,2) scheduling(0:1000,1:5000)
    {
        a = 1.0;
    }
}
