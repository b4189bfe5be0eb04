#pragma once

// Dormand–Prince 8(5,3) with 7th-order dense output, for complex state vectors.
// Standard DOP853 tableau and step control.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "kads/errors.hpp"
#include "kads/poly.hpp"

namespace kads {

namespace dop853c {

inline constexpr int n_stages = 12;

inline constexpr double C[16] = {0.0,
                                 0.526001519587677318785587544488e-01,
                                 0.789002279381515978178381316732e-01,
                                 0.118350341907227396726757197510,
                                 0.281649658092772603273242802490,
                                 0.333333333333333333333333333333,
                                 0.25,
                                 0.307692307692307692307692307692,
                                 0.651282051282051282051282051282,
                                 0.6,
                                 0.857142857142857142857142857142,
                                 1.0,
                                 1.0,
                                 0.1,
                                 0.2,
                                 0.777777777777777777777777777778};

struct Tableau {
    double A[16][16] = {};
    double E3[13] = {};
    double E5[13] = {};
    double D[4][16] = {};
};

inline const Tableau& tableau() {
    static const Tableau t = [] {
        Tableau T;
        auto& A = T.A;
        A[1][0] = 5.26001519587677318785587544488e-2;
        A[2][0] = 1.97250569845378994544595329183e-2;
        A[2][1] = 5.91751709536136983633785987549e-2;
        A[3][0] = 2.95875854768068491816892993775e-2;
        A[3][2] = 8.87627564304205475450678981324e-2;
        A[4][0] = 2.41365134159266685502369798665e-1;
        A[4][2] = -8.84549479328286085344864962717e-1;
        A[4][3] = 9.24834003261792003115737966543e-1;
        A[5][0] = 3.7037037037037037037037037037e-2;
        A[5][3] = 1.70828608729473871279604482173e-1;
        A[5][4] = 1.25467687566822425016691814123e-1;
        A[6][0] = 3.7109375e-2;
        A[6][3] = 1.70252211019544039314978060272e-1;
        A[6][4] = 6.02165389804559606850219397283e-2;
        A[6][5] = -1.7578125e-2;
        A[7][0] = 3.70920001185047927108779319836e-2;
        A[7][3] = 1.70383925712239993810214054705e-1;
        A[7][4] = 1.07262030446373284651809199168e-1;
        A[7][5] = -1.53194377486244017527936158236e-2;
        A[7][6] = 8.27378916381402288758473766002e-3;
        A[8][0] = 6.24110958716075717114429577812e-1;
        A[8][3] = -3.36089262944694129406857109825;
        A[8][4] = -8.68219346841726006818189891453e-1;
        A[8][5] = 2.75920996994467083049415600797e1;
        A[8][6] = 2.01540675504778934086186788979e1;
        A[8][7] = -4.34898841810699588477366255144e1;
        A[9][0] = 4.77662536438264365890433908527e-1;
        A[9][3] = -2.48811461997166764192642586468;
        A[9][4] = -5.90290826836842996371446475743e-1;
        A[9][5] = 2.12300514481811942347288949897e1;
        A[9][6] = 1.52792336328824235832596922938e1;
        A[9][7] = -3.32882109689848629194453265587e1;
        A[9][8] = -2.03312017085086261358222928593e-2;
        A[10][0] = -9.3714243008598732571704021658e-1;
        A[10][3] = 5.18637242884406370830023853209;
        A[10][4] = 1.09143734899672957818500254654;
        A[10][5] = -8.14978701074692612513997267357;
        A[10][6] = -1.85200656599969598641566180701e1;
        A[10][7] = 2.27394870993505042818970056734e1;
        A[10][8] = 2.49360555267965238987089396762;
        A[10][9] = -3.0467644718982195003823669022;
        A[11][0] = 2.27331014751653820792359768449;
        A[11][3] = -1.05344954667372501984066689879e1;
        A[11][4] = -2.00087205822486249909675718444;
        A[11][5] = -1.79589318631187989172765950534e1;
        A[11][6] = 2.79488845294199600508499808837e1;
        A[11][7] = -2.85899827713502369474065508674;
        A[11][8] = -8.87285693353062954433549289258;
        A[11][9] = 1.23605671757943030647266201528e1;
        A[11][10] = 6.43392746015763530355970484046e-1;
        A[12][0] = 5.42937341165687622380535766363e-2;
        A[12][5] = 4.45031289275240888144113950566;
        A[12][6] = 1.89151789931450038304281599044;
        A[12][7] = -5.8012039600105847814672114227;
        A[12][8] = 3.1116436695781989440891606237e-1;
        A[12][9] = -1.52160949662516078556178806805e-1;
        A[12][10] = 2.01365400804030348374776537501e-1;
        A[12][11] = 4.47106157277725905176885569043e-2;
        A[13][0] = 5.61675022830479523392909219681e-2;
        A[13][6] = 2.53500210216624811088794765333e-1;
        A[13][7] = -2.46239037470802489917441475441e-1;
        A[13][8] = -1.24191423263816360469010140626e-1;
        A[13][9] = 1.5329179827876569731206322685e-1;
        A[13][10] = 8.20105229563468988491666602057e-3;
        A[13][11] = 7.56789766054569976138603589584e-3;
        A[13][12] = -8.298e-3;
        A[14][0] = 3.18346481635021405060768473261e-2;
        A[14][5] = 2.83009096723667755288322961402e-2;
        A[14][6] = 5.35419883074385676223797384372e-2;
        A[14][7] = -5.49237485713909884646569340306e-2;
        A[14][10] = -1.08347328697249322858509316994e-4;
        A[14][11] = 3.82571090835658412954920192323e-4;
        A[14][12] = -3.40465008687404560802977114492e-4;
        A[14][13] = 1.41312443674632500278074618366e-1;
        A[15][0] = -4.28896301583791923408573538692e-1;
        A[15][5] = -4.69762141536116384314449447206;
        A[15][6] = 7.68342119606259904184240953878;
        A[15][7] = 4.06898981839711007970213554331;
        A[15][8] = 3.56727187455281109270669543021e-1;
        A[15][12] = -1.39902416515901462129418009734e-3;
        A[15][13] = 2.9475147891527723389556272149;
        A[15][14] = -9.15095847217987001081870187138;

        for (int i = 0; i < 12; ++i) T.E3[i] = A[12][i];
        T.E3[0] -= 0.244094488188976377952755905512;
        T.E3[8] -= 0.733846688281611857341361741547;
        T.E3[11] -= 0.220588235294117647058823529412e-1;

        T.E5[0] = 0.1312004499419488073250102996e-1;
        T.E5[5] = -0.1225156446376204440720569753e+1;
        T.E5[6] = -0.4957589496572501915214079952;
        T.E5[7] = 0.1664377182454986536961530415e+1;
        T.E5[8] = -0.3503288487499736816886487290;
        T.E5[9] = 0.3341791187130174790297318841;
        T.E5[10] = 0.8192320648511571246570742613e-1;
        T.E5[11] = -0.2235530786388629525884427845e-1;

        auto& D = T.D;
        D[0][0] = -0.84289382761090128651353491142e+1;
        D[0][5] = 0.56671495351937776962531783590;
        D[0][6] = -0.30689499459498916912797304727e+1;
        D[0][7] = 0.23846676565120698287728149680e+1;
        D[0][8] = 0.21170345824450282767155149946e+1;
        D[0][9] = -0.87139158377797299206789907490;
        D[0][10] = 0.22404374302607882758541771650e+1;
        D[0][11] = 0.63157877876946881815570249290;
        D[0][12] = -0.88990336451333310820698117400e-1;
        D[0][13] = 0.18148505520854727256656404962e+2;
        D[0][14] = -0.91946323924783554000451984436e+1;
        D[0][15] = -0.44360363875948939664310572000e+1;
        D[1][0] = 0.10427508642579134603413151009e+2;
        D[1][5] = 0.24228349177525818288430175319e+3;
        D[1][6] = 0.16520045171727028198505394887e+3;
        D[1][7] = -0.37454675472269020279518312152e+3;
        D[1][8] = -0.22113666853125306036270938578e+2;
        D[1][9] = 0.77334326684722638389603898808e+1;
        D[1][10] = -0.30674084731089398182061213626e+2;
        D[1][11] = -0.93321305264302278729567221706e+1;
        D[1][12] = 0.15697238121770843886131091075e+2;
        D[1][13] = -0.31139403219565177677282850411e+2;
        D[1][14] = -0.93529243588444783865713862664e+1;
        D[1][15] = 0.35816841486394083752465898540e+2;
        D[2][0] = 0.19985053242002433820987653617e+2;
        D[2][5] = -0.38703730874935176555105901742e+3;
        D[2][6] = -0.18917813819516756882830838328e+3;
        D[2][7] = 0.52780815920542364900561016686e+3;
        D[2][8] = -0.11573902539959630126141871134e+2;
        D[2][9] = 0.68812326946963000169666922661e+1;
        D[2][10] = -0.10006050966910838403183860980e+1;
        D[2][11] = 0.77771377980534432092869265740;
        D[2][12] = -0.27782057523535084065932004339e+1;
        D[2][13] = -0.60196695231264120758267380846e+2;
        D[2][14] = 0.84320405506677161018159903784e+2;
        D[2][15] = 0.11992291136182789328035130030e+2;
        D[3][0] = -0.25693933462703749003312586129e+2;
        D[3][5] = -0.15418974869023643374053993627e+3;
        D[3][6] = -0.23152937917604549567536039109e+3;
        D[3][7] = 0.35763911791061412378285349910e+3;
        D[3][8] = 0.93405324183624310003907691704e+2;
        D[3][9] = -0.37458323136451633156875139351e+2;
        D[3][10] = 0.10409964950896230045147246184e+3;
        D[3][11] = 0.29840293426660503123344363579e+2;
        D[3][12] = -0.43533456590011143754432175058e+2;
        D[3][13] = 0.96324553959188282948394950600e+2;
        D[3][14] = -0.39177261675615439165231486172e+2;
        D[3][15] = -0.14972683625798562581422125276e+3;
        return T;
    }();
    return t;
}

} // namespace dop853c

struct Dop853Options {
    double rtol = 1e-10;
    double atol = 1e-300;
    double max_step = std::numeric_limits<double>::infinity();
    double first_step = 0.0;       // 0: automatic
    long max_steps = 2'000'000;
    // For linear homogeneous systems: renormalize the state when it exceeds this size.
    double rescale_above = 0.0;    // 0: disabled
};

struct Dop853Stats {
    long nfev = 0, accepted = 0, rejected = 0, rescales = 0;
};

template <std::size_t N>
struct Dop853Segment {
    using State = std::array<cplx, N>;
    double t0 = 0, t1 = 0;
    State y0{};
    std::array<State, 7> F{};
    double log_scale = 0;  // the state here equals the true state times exp(−log_scale)

    State operator()(double t) const {
        const double h = t1 - t0;
        const double x = h == 0 ? 0.0 : (t - t0) / h;
        State y{};
        for (int i = 0; i < 7; ++i) {
            const auto& f = F[6 - i];
            const double fac = (i % 2 == 0) ? x : 1.0 - x;
            for (std::size_t j = 0; j < N; ++j) y[j] = (y[j] + f[j]) * fac;
        }
        for (std::size_t j = 0; j < N; ++j) y[j] += y0[j];
        return y;
    }
};

template <std::size_t N>
struct Dop853Result {
    using State = std::array<cplx, N>;
    std::vector<double> t;
    std::vector<State> y;            // in the units of the segment ending there
    std::vector<double> log_scale;   // per node
    std::vector<Dop853Segment<N>> segments;
    Dop853Stats stats;
};

/// Integrate y′ = f(t, y) from t0 to t1 (either direction).
template <std::size_t N, class F>
Dop853Result<N> dop853(F&& f, double t0, std::array<cplx, N> y0, double t1, const Dop853Options& opt = {}) {
    using State = std::array<cplx, N>;
    const auto& T = dop853c::tableau();
    constexpr int S = dop853c::n_stages;
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    Dop853Result<N> res;

    auto maxabs = [](const State& a) {
        double m = 0;
        for (const auto& v : a) m = std::max(m, std::abs(v));
        return m;
    };
    auto eval = [&](double t, const State& y) {
        ++res.stats.nfev;
        return f(t, y);
    };

    State y = y0;
    State fy = eval(t0, y);
    double t = t0;
    double log_scale = 0.0;
    res.t.push_back(t);
    res.y.push_back(y);
    res.log_scale.push_back(0.0);
    if (t0 == t1) return res;

    // initial step (Hairer–Wanner heuristic)
    double h_abs = opt.first_step;
    if (h_abs <= 0) {
        const double sc0 = opt.atol + opt.rtol * maxabs(y);
        double d0 = 0, d1 = 0;
        for (std::size_t j = 0; j < N; ++j) {
            d0 += std::norm(y[j]) / (sc0 * sc0);
            d1 += std::norm(fy[j]) / (sc0 * sc0);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, std::abs(t1 - t0));
        State y1;
        for (std::size_t j = 0; j < N; ++j) y1[j] = y[j] + h0 * dir * fy[j];
        const State f1 = eval(t + h0 * dir, y1);
        double d2 = 0;
        for (std::size_t j = 0; j < N; ++j) d2 += std::norm(f1[j] - fy[j]) / (sc0 * sc0);
        d2 = std::sqrt(d2 / N) / h0;
        const double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                        : std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
        h_abs = std::min(100 * h0, h1);
    }
    h_abs = std::min(h_abs, opt.max_step);

    std::array<State, 16> K;
    long steps = 0;
    while (dir * (t1 - t) > 0) {
        if (++steps > opt.max_steps) throw StepSizeCollapse("DOP853: maximum number of steps exceeded");
        const double min_step = 10.0 * std::abs(std::nextafter(t, dir * std::numeric_limits<double>::infinity()) - t);
        bool rejected_once = false;
        State y_new, f_new;
        double h;
        for (;;) {
            if (h_abs < min_step) throw StepSizeCollapse("DOP853: step size collapsed");
            h = h_abs * dir;
            double t_new = t + h;
            if (dir * (t_new - t1) > 0) t_new = t1;
            h = t_new - t;
            h_abs = std::abs(h);

            K[0] = fy;
            for (int s = 1; s < S; ++s) {
                State ys = y;
                for (int j = 0; j < s; ++j) {
                    const double a = T.A[s][j];
                    if (a == 0.0) continue;
                    for (std::size_t c = 0; c < N; ++c) ys[c] += (h * a) * K[j][c];
                }
                K[s] = eval(t + dop853c::C[s] * h, ys);
            }
            y_new = y;
            for (int j = 0; j < S; ++j) {
                const double b = T.A[12][j];
                if (b == 0.0) continue;
                for (std::size_t c = 0; c < N; ++c) y_new[c] += (h * b) * K[j][c];
            }
            f_new = eval(t + h, y_new);
            K[S] = f_new;

            const double sc = opt.atol + opt.rtol * std::max(maxabs(y), maxabs(y_new));
            double e5 = 0, e3 = 0;
            for (std::size_t c = 0; c < N; ++c) {
                cplx a5 = 0, a3 = 0;
                for (int j = 0; j <= S; ++j) {
                    a5 += T.E5[j] * K[j][c];
                    a3 += T.E3[j] * K[j][c];
                }
                e5 += std::norm(a5 / sc);
                e3 += std::norm(a3 / sc);
            }
            double err = 0;
            if (e5 != 0 || e3 != 0) err = h_abs * e5 / std::sqrt((e5 + 0.01 * e3) * N);
            if (!std::isfinite(err)) {
                h_abs *= 0.2;
                rejected_once = true;
                ++res.stats.rejected;
                continue;
            }
            if (err < 1.0) {
                double factor = err == 0 ? 10.0 : std::min(10.0, 0.9 * std::pow(err, -1.0 / 8.0));
                if (rejected_once) factor = std::min(1.0, factor);
                h_abs = std::min(h_abs * factor, opt.max_step);
                break;
            }
            h_abs *= std::max(0.2, 0.9 * std::pow(err, -1.0 / 8.0));
            rejected_once = true;
            ++res.stats.rejected;
        }
        ++res.stats.accepted;

        // dense output for [t, t + h]
        for (int s = S + 1; s < 16; ++s) {
            State ys = y;
            for (int j = 0; j < s; ++j) {
                const double a = T.A[s][j];
                if (a == 0.0) continue;
                for (std::size_t c = 0; c < N; ++c) ys[c] += (h * a) * K[j][c];
            }
            K[s] = eval(t + dop853c::C[s] * h, ys);
        }
        Dop853Segment<N> seg;
        seg.t0 = t;
        seg.t1 = t + h;
        seg.y0 = y;
        seg.log_scale = log_scale;
        for (std::size_t c = 0; c < N; ++c) {
            const cplx dy = y_new[c] - y[c];
            seg.F[0][c] = dy;
            seg.F[1][c] = h * K[0][c] - dy;
            seg.F[2][c] = 2.0 * dy - h * (f_new[c] + K[0][c]);
            for (int r = 0; r < 4; ++r) {
                cplx acc = 0;
                for (int j = 0; j < 16; ++j) acc += T.D[r][j] * K[j][c];
                seg.F[3 + r][c] = h * acc;
            }
        }
        res.segments.push_back(seg);

        t = seg.t1;
        y = y_new;
        fy = f_new;
        if (opt.rescale_above > 0) {
            const double m = maxabs(y);
            if (m > opt.rescale_above) {
                for (auto& v : y) v /= m;
                for (auto& v : fy) v /= m;
                log_scale += std::log(m);
                ++res.stats.rescales;
            }
        }
        res.t.push_back(t);
        res.y.push_back(y);
        res.log_scale.push_back(log_scale);
    }
    return res;
}

} // namespace kads
