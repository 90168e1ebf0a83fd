// expect: TYPE_MISMATCH
stream<double> s;
stream<double> t;

void Pass()
{
    #pragma hstream in(s:int) out(t:double)
    {
        t = s;
    }
}
