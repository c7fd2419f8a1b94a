#ifndef KPRL_CORELIB_H
#define KPRL_CORELIB_H

void kprl_affine_tanh(const double *w, const double *b, const double *x,
                      double *out, long m, long n);
void kprl_affine(const double *w, const double *b, const double *x,
                 double *out, long m, long n);
void kprl_matvec_t(const double *w, const double *g, double *out, long m,
                   long n);
void kprl_rms_mat(double *acc, double *w, const double *rowg,
                  const double *colh, long m, long n, double decay, double lr,
                  double eps);
void kprl_rms_vec(double *acc, double *b, const double *g, long n,
                  double decay, double lr, double eps);

#endif
