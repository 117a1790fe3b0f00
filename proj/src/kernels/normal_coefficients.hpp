#pragma once

// Coefficient tables shared by the scalar and AVX2 kernels. Highest degree
// first (Horner order).

namespace onebit::kernels::coeff {

inline constexpr double kSqrt2Pi = 2.506628274631;
inline constexpr double kCdfSplit = 7.07106781186547;
inline constexpr double kCdfZeroBeyond = 37.0;

inline constexpr double kCdfNum[7] = {3.52624965998911e-02, 0.700383064443688, 6.37396220353165,
                                      33.912866078383,      112.079291497871,  221.213596169931,
                                      220.206867912376};
inline constexpr double kCdfDen[8] = {8.83883476483184e-02, 1.75566716318264, 16.064177579207,
                                      86.7807322029461,     296.564248779674, 637.333633378831,
                                      793.826512519948,     440.413735824752};

// AS241 (PPND16).
inline constexpr double kQuantA[8] = {
    2.5090809287301226727e+3, 3.3430575583588128105e+4, 6.7265770927008700853e+4,
    4.5921953931549871457e+4, 1.3731693765509461125e+4, 1.9715909503065514427e+3,
    1.3314166789178437745e+2, 3.3871328727963666080e0};
inline constexpr double kQuantB[8] = {
    5.2264952788528545610e+3, 2.8729085735721942674e+4, 3.9307895800092710610e+4,
    2.1213794301586595867e+4, 5.3941960214247511077e+3, 6.8718700749205790830e+2,
    4.2313330701600911252e+1, 1.0};
inline constexpr double kQuantC[8] = {
    7.74545014278341407640e-4, 2.27238449892691845833e-2, 2.41780725177450611770e-1,
    1.27045825245236838258e0,  3.64784832476320460504e0,  5.76949722146069140550e0,
    4.63033784615654529590e0,  1.42343711074968357734e0};
inline constexpr double kQuantD[8] = {
    1.05075007164441684324e-9, 5.47593808499534494600e-4, 1.51986665636164571966e-2,
    1.48103976427480074590e-1, 6.89767334985100004550e-1, 1.67638483018380384940e0,
    2.05319162663775882187e0,  1.0};
inline constexpr double kQuantE[8] = {
    2.01033439929228813265e-7, 2.71155556874348757815e-5, 1.24266094738807843860e-3,
    2.65321895265761230930e-2, 2.96560571828504891230e-1, 1.78482653991729133580e0,
    5.46378491116411436990e0,  6.65790464350110377720e0};
inline constexpr double kQuantF[8] = {
    2.04426310338993978564e-15, 1.42151175831644588870e-7, 1.84631831751005468180e-5,
    7.86869131145613259100e-4,  1.48753612908506148525e-2, 1.36929880922735805310e-1,
    5.99832206555887937690e-1,  1.0};

// Cephes exp: exp(r) = 1 + 2 r P(r^2) / (Q(r^2) - r P(r^2)).
inline constexpr double kExpP[3] = {1.26177193074810590878e-4, 3.02994407707441961300e-2,
                                    9.99999999999999999910e-1};
inline constexpr double kExpQ[4] = {3.00198505138664455042e-6, 2.52448340349684104192e-3,
                                    2.27265548208155028766e-1, 2.00000000000000000009e0};
inline constexpr double kLn2Hi = 6.93145751953125e-1;
inline constexpr double kLn2Lo = 1.42860682030941723212e-6;

// Cephes log on [sqrt(1/2), sqrt(2)).
inline constexpr double kLogP[6] = {1.01875663804580931796e-4, 4.97494994976747001425e-1,
                                    4.70579119878881725854e0,  1.44989225341610930846e1,
                                    1.79368678507819816313e1,  7.70838733755885391666e0};
inline constexpr double kLogQ[6] = {1.0,
                                    1.12873587189167450590e1,
                                    4.52279145837532221105e1,
                                    8.29875266912776603211e1,
                                    7.11544750618563894466e1,
                                    2.31251620126765340583e1};

}  // namespace onebit::kernels::coeff
