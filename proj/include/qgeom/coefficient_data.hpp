#pragma once

// Printed coefficient tables, one line per entry: kind component alpha value.
// Values are the printed significands with the column scale written as an exponent.
//   a: quantum metric, k > 0      b: classical metric, k > 0    c: classical metric, k < 0
//   d: quantum curvature, k > 0   h: classical curvature, k > 0 l: classical curvature, k < 0

namespace qgeom::data {

inline constexpr const char* kPrintedTables = R"(
a 11 0 3.125e-2
a 11 1 2.1484e-2
a 11 2 1.5971e-2
a 11 3 1.3201e-2
a 11 4 1.2078e-2
a 11 5 1.2156e-2
a 11 6 1.3384e-2
a 11 7 1.6053e-2
a 11 8 2.0893e-2
a 11 9 2.9401e-2
a 11 10 4.4588e-2
a 12 0 0.78125e-2
a 12 1 0.72428e-2
a 12 2 0.65121e-2
a 12 3 0.62212e-2
a 12 4 0.64218e-2
a 12 5 0.71847e-2
a 12 6 0.87078e-2
a 12 7 1.1413e-2
a 12 8 1.6137e-2
a 12 9 2.4552e-2
a 12 10 4.0081e-2
a 22 0 0.21159e-2
a 22 1 0.25228e-2
a 22 2 0.26951e-2
a 22 3 0.29484e-2
a 22 4 0.34133e-2
a 22 5 0.42264e-2
a 22 6 0.56167e-2
a 22 7 0.80155e-2
a 22 8 1.2271e-2
a 22 9 2.0117e-2
a 22 10 3.5236e-2
b 11 0 312.5e-4
b 11 1 143.23e-4
b 11 2 65.07e-4
b 11 3 30.272e-4
b 11 4 14.402e-4
b 11 5 6.9781e-4
b 11 6 3.4315e-4
b 11 7 1.7079e-4
b 11 8 0.85856e-4
b 11 9 0.4352e-4
b 11 10 0.22216e-4
b 12 0 52.083e-4
b 12 1 29.772e-4
b 12 2 15.191e-4
b 12 3 7.6057e-4
b 12 4 3.8085e-4
b 12 5 1.9169e-4
b 12 6 0.97081e-4
b 12 7 0.49472e-4
b 12 8 0.25355e-4
b 12 9 0.13062e-4
b 12 10 0.067608e-4
b 22 0 88.162e-5
b 22 1 60.357e-5
b 22 2 34.176e-5
b 22 3 18.337e-5
b 22 4 9.6513e-5
b 22 5 5.0451e-5
b 22 6 2.6326e-5
b 22 7 1.3745e-5
b 22 8 0.71878e-5
b 22 9 0.37665e-5
b 22 10 0.19781e-5
c 11 0 212.13e-2
c 11 1 40.625e-2
c 11 2 17.678e-2
c 11 3 9.4394e-2
c 11 4 5.5548e-2
c 11 5 3.4622e-2
c 11 6 1.8352e-2
c 12 0 212.13e-2
c 12 1 18.75e-2
c 12 2 9.8823e-2
c 12 3 5.481e-2
c 12 4 3.2736e-2
c 12 5 2.0555e-2
c 12 6 1.0193e-2
c 12 7 0.50029e-2
c 22 0 212.13e-2
c 22 1 0e-2
c 22 2 4.4399e-2
c 22 3 2.7389e-2
c 22 4 1.7019e-2
c 22 5 1.0902e-2
c 22 6 0.48949e-2
c 22 7 0.18924e-2
c 22 8 0.12832e-2
d R 0 28
d R 1 30.5556
d R 2 54.6499
d R 3 106.587
d R 4 220.2
d R 5 476.399
d R 6 1073.07
d R 7 2507.83
d R 8 6067.94
h R 0 21.1866
h R 1 0.833929
h R 2 60.5879
h R 3 95.9538
h R 4 205.334
h R 5 444.255
h R 6 1003.07
h R 7 2348.16
h R 8 1574.36
l R 0 -4
l R 1 0
l R 2 1.02388
l R 3 1.84957
)";

/// Identification coefficients f_1..f_14 as printed (f_1 is a convention).
inline constexpr double kPrintedF[14] = {0.5,    1.0,    1.1447, 1.2484, 1.3372, 1.4186, 1.4962,
                                         1.5720, 1.6470, 1.7219, 1.7972, 1.8730, 1.9433, 2.0120};

}  // namespace qgeom::data
