// expect: OUT_OF_SCOPE
double a[1024];

void Scale()
{
    #pragma hstream in(a,late) out(a)
    {
        a = late*a;
    }
}

double late = 2.0;
