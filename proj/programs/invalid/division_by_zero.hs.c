// expect: DIVISION_BY_ZERO
int n = 8;
int zero = 0;
int ratio = n / zero;
