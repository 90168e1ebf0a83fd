// expect: TYPE_MISMATCH
int count = 2.5;
