// expect: DUP_DECLARATION
double a[1024];
double scalar = 1.0;
double a[2048];
