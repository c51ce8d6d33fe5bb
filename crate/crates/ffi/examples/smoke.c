/* cc smoke.c -I../include -L../../../target/release -lmcrecon_ffi -lm */
#include <stdio.h>
#include "mcrecon.h"

int main(void) {
    McKernel *k = NULL;
    McSpectrum *truth = NULL, *rec = NULL;
    McSamples *s = NULL;
    double coeffs[12] = {1, 0, 0.5, -0.5, 0, 1, 0.25, 0, 0, 0, -1, 0.5};
    double psd[8];

    if (mc_kernel_new_centered(MC_SCHEME_FD2, 8, &k) != MC_STATUS_OK ||
        mc_spectrum_new(-2, 6, coeffs, &truth) != MC_STATUS_OK ||
        mc_samples_simulate(k, truth, 0.05, 42, 0, &s) != MC_STATUS_OK ||
        mc_reconstruct_filtered(k, s, 0.05, false, MC_POST_OPTIMAL, &rec) != MC_STATUS_OK ||
        mc_estimate_psd(k, s, 0.05, psd, 8) != MC_STATUS_OK) {
        fprintf(stderr, "mcrecon: %s\n", mc_last_error());
        return 1;
    }
    double factor, cond;
    mc_kernel_diagnostics(k, &factor, &cond);
    printf("noise factor %.6f, max condition %.3f, A~(0) = %.4f\n", factor, cond, psd[4]);

    mc_spectrum_free(rec);
    mc_samples_free(s);
    mc_spectrum_free(truth);
    mc_kernel_free(k);
    return 0;
}
