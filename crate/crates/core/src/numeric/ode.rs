//! Explicit Dormand–Prince 8(5,3) integrator on fixed-size states.
//!
//! The integrator keeps the full record of every accepted step (start state,
//! start slope, step length). Re-running a single step with a shorter length
//! from that record gives the solution anywhere inside the step to local
//! accuracy, which is how events and dense samples are located.

use crate::error::{Error, Result};

/// Right-hand side `y' = g(t, y)`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]);
}

/// Mixed absolute / relative error tolerances.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Result<Self> {
        if !(rtol > 0.0 && atol > 0.0 && rtol.is_finite() && atol.is_finite()) {
            return Err(Error::Parameter(format!(
                "tolerances must be positive and finite (rtol = {rtol}, atol = {atol})"
            )));
        }
        Ok(Self { rtol, atol })
    }

    /// Tolerances tightened by `factor` (> 1 tightens).
    pub fn tightened(self, factor: f64) -> Self {
        Self {
            rtol: self.rtol / factor,
            atol: self.atol / factor,
        }
    }
}

/// One accepted step.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub h: f64,
    pub y1: [f64; N],
}

impl<const N: usize> StepRecord<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// State at `t0 + s`, `0 <= s <= h`, by re-stepping from the start.
    pub fn state_at<S: OdeSystem<N>>(&self, sys: &S, s: f64) -> [f64; N] {
        if s <= 0.0 {
            return self.y0;
        }
        if s >= self.h {
            return self.y1;
        }
        dop853_step(sys, self.t0, &self.y0, &self.f0, s).y
    }
}

pub(crate) struct StepResult<const N: usize> {
    pub y: [f64; N],
    pub err5: [f64; N],
    pub err3: [f64; N],
}

#[inline]
fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Single DOP853 step of length `h` from `(t, y)` with `f0 = g(t, y)`.
pub(crate) fn dop853_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    h: f64,
) -> StepResult<N> {
    let k1 = *f0;
    let mut k2 = [0.0; N];
    let mut k3 = [0.0; N];
    let mut k4 = [0.0; N];
    let mut k5 = [0.0; N];
    let mut k6 = [0.0; N];
    let mut k7 = [0.0; N];
    let mut k8 = [0.0; N];
    let mut k9 = [0.0; N];
    let mut k10 = [0.0; N];
    let mut k11 = [0.0; N];
    let mut k12 = [0.0; N];

    sys.rhs(t + C2 * h, &combo(y, h, &[(A21, &k1)]), &mut k2);
    sys.rhs(t + C3 * h, &combo(y, h, &[(A31, &k1), (A32, &k2)]), &mut k3);
    sys.rhs(t + C4 * h, &combo(y, h, &[(A41, &k1), (A43, &k3)]), &mut k4);
    sys.rhs(
        t + C5 * h,
        &combo(y, h, &[(A51, &k1), (A53, &k3), (A54, &k4)]),
        &mut k5,
    );
    sys.rhs(
        t + C6 * h,
        &combo(y, h, &[(A61, &k1), (A64, &k4), (A65, &k5)]),
        &mut k6,
    );
    sys.rhs(
        t + C7 * h,
        &combo(y, h, &[(A71, &k1), (A74, &k4), (A75, &k5), (A76, &k6)]),
        &mut k7,
    );
    sys.rhs(
        t + C8 * h,
        &combo(
            y,
            h,
            &[(A81, &k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)],
        ),
        &mut k8,
    );
    sys.rhs(
        t + C9 * h,
        &combo(
            y,
            h,
            &[
                (A91, &k1),
                (A94, &k4),
                (A95, &k5),
                (A96, &k6),
                (A97, &k7),
                (A98, &k8),
            ],
        ),
        &mut k9,
    );
    sys.rhs(
        t + C10 * h,
        &combo(
            y,
            h,
            &[
                (A101, &k1),
                (A104, &k4),
                (A105, &k5),
                (A106, &k6),
                (A107, &k7),
                (A108, &k8),
                (A109, &k9),
            ],
        ),
        &mut k10,
    );
    sys.rhs(
        t + C11 * h,
        &combo(
            y,
            h,
            &[
                (A111, &k1),
                (A114, &k4),
                (A115, &k5),
                (A116, &k6),
                (A117, &k7),
                (A118, &k8),
                (A119, &k9),
                (A1110, &k10),
            ],
        ),
        &mut k11,
    );
    sys.rhs(
        t + h,
        &combo(
            y,
            h,
            &[
                (A121, &k1),
                (A124, &k4),
                (A125, &k5),
                (A126, &k6),
                (A127, &k7),
                (A128, &k8),
                (A129, &k9),
                (A1210, &k10),
                (A1211, &k11),
            ],
        ),
        &mut k12,
    );

    let mut ynew = *y;
    let mut err5 = [0.0; N];
    let mut err3 = [0.0; N];
    for i in 0..N {
        let incr = B1 * k1[i]
            + B6 * k6[i]
            + B7 * k7[i]
            + B8 * k8[i]
            + B9 * k9[i]
            + B10 * k10[i]
            + B11 * k11[i]
            + B12 * k12[i];
        ynew[i] = y[i] + h * incr;
        err3[i] = incr - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i];
        err5[i] = ER1 * k1[i]
            + ER6 * k6[i]
            + ER7 * k7[i]
            + ER8 * k8[i]
            + ER9 * k9[i]
            + ER10 * k10[i]
            + ER11 * k11[i]
            + ER12 * k12[i];
    }
    StepResult {
        y: ynew,
        err5,
        err3,
    }
}

/// Adaptive driver. Call [`Integrator::advance`] repeatedly; each call
/// returns one accepted step.
pub struct Integrator<'a, S, const N: usize> {
    sys: &'a S,
    tol: Tolerances,
    t: f64,
    y: [f64; N],
    f: [f64; N],
    h: f64,
    h_max: f64,
    atol_scale: [f64; N],
    facold: f64,
    last_rejected: bool,
    accepted: usize,
    max_steps: usize,
}

impl<'a, S: OdeSystem<N>, const N: usize> Integrator<'a, S, N> {
    pub fn new(sys: &'a S, t0: f64, y0: [f64; N], h_init: f64, tol: Tolerances) -> Self {
        let mut f = [0.0; N];
        sys.rhs(t0, &y0, &mut f);
        Self {
            sys,
            tol,
            t: t0,
            y: y0,
            f,
            h: h_init,
            h_max: f64::INFINITY,
            atol_scale: [1.0; N],
            facold: 1e-4,
            last_rejected: false,
            accepted: 0,
            max_steps: 2_000_000,
        }
    }

    pub fn with_max_step(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self.h = self.h.min(h_max);
        self
    }

    /// Per-component multipliers of the absolute tolerance.
    pub fn with_atol_scales(mut self, scales: [f64; N]) -> Self {
        self.atol_scale = scales;
        self
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64; N] {
        &self.y
    }

    pub fn accepted_steps(&self) -> usize {
        self.accepted
    }

    /// Caps the next attempted step length.
    pub fn limit_next_step(&mut self, h: f64) {
        if h > 0.0 && h < self.h {
            self.h = h;
        }
    }

    /// Performs one accepted step.
    pub fn advance(&mut self) -> Result<StepRecord<N>> {
        const SAFE: f64 = 0.9;
        const FAC1: f64 = 0.333;
        const FAC2: f64 = 6.0;
        const BETA: f64 = 0.0;
        let expo1 = 1.0 / 8.0 - BETA * 0.2;

        if self.accepted >= self.max_steps {
            return Err(Error::NoConvergence {
                what: "dop853 integrator",
                detail: format!(
                    "step budget of {} exhausted at t = {}",
                    self.max_steps, self.t
                ),
            });
        }

        loop {
            let h = self.h.min(self.h_max);
            let h_min = 16.0 * f64::EPSILON * self.t.abs().max(1e-300);
            if !(h > h_min) {
                return Err(Error::NoConvergence {
                    what: "dop853 integrator",
                    detail: format!("step size underflow (h = {h:e}) at t = {}", self.t),
                });
            }
            let step = dop853_step(self.sys, self.t, &self.y, &self.f, h);

            let mut err = 0.0;
            let mut err2 = 0.0;
            let mut finite = true;
            for i in 0..N {
                let sk = self.tol.atol * self.atol_scale[i]
                    + self.tol.rtol * self.y[i].abs().max(step.y[i].abs());
                err2 += (step.err3[i] / sk).powi(2);
                err += (step.err5[i] / sk).powi(2);
                finite &= step.y[i].is_finite();
            }
            if !finite || !err.is_finite() || !err2.is_finite() {
                self.h = h * 0.25;
                self.last_rejected = true;
                continue;
            }
            let mut deno = err + 0.01 * err2;
            if deno <= 0.0 {
                deno = 1.0;
            }
            let err = h.abs() * err * (1.0 / (deno * N as f64)).sqrt();

            let fac11 = err.powf(expo1);
            let fac = (fac11 / self.facold.powf(BETA) / SAFE).clamp(1.0 / FAC2, 1.0 / FAC1);
            let mut h_new = h / fac;

            if err <= 1.0 {
                let mut f1 = [0.0; N];
                self.sys.rhs(self.t + h, &step.y, &mut f1);
                if f1.iter().any(|v| !v.is_finite()) {
                    self.h = h * 0.25;
                    self.last_rejected = true;
                    continue;
                }
                self.facold = err.max(1e-4);
                if self.last_rejected {
                    h_new = h_new.min(h);
                }
                let record = StepRecord {
                    t0: self.t,
                    y0: self.y,
                    f0: self.f,
                    h,
                    y1: step.y,
                };
                self.t += h;
                self.y = step.y;
                self.f = f1;
                self.h = h_new.min(self.h_max);
                self.last_rejected = false;
                self.accepted += 1;
                return Ok(record);
            }
            self.h = h / (1.0 / FAC1).min(fac11 / SAFE);
            self.last_rejected = true;
        }
    }
}

const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

#[cfg(test)]
mod tests {
    use super::*;

    struct Harmonic;
    impl OdeSystem<2> for Harmonic {
        fn rhs(&self, _t: f64, y: &[f64; 2], dy: &mut [f64; 2]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    struct Exponential;
    impl OdeSystem<1> for Exponential {
        fn rhs(&self, _t: f64, y: &[f64; 1], dy: &mut [f64; 1]) {
            dy[0] = y[0];
        }
    }

    #[test]
    fn harmonic_oscillator_period() {
        let tol = Tolerances::new(1e-12, 1e-14).unwrap();
        let mut it = Integrator::new(&Harmonic, 0.0, [1.0, 0.0], 1e-3, tol);
        let t_end = 2.0 * std::f64::consts::PI;
        let mut last = None;
        while it.time() < t_end {
            let rec = it.advance().unwrap();
            if rec.t1() >= t_end {
                last = Some(rec);
                break;
            }
        }
        let rec = last.unwrap();
        let y = rec.state_at(&Harmonic, t_end - rec.t0);
        assert!((y[0] - 1.0).abs() < 1e-10, "{y:?}");
        assert!(y[1].abs() < 1e-10, "{y:?}");
    }

    #[test]
    fn eighth_order_convergence() {
        // fixed steps: error ratio for halving h should be close to 2^8
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let mut y = [1.0];
            let mut t = 0.0;
            for _ in 0..n {
                let mut f = [0.0];
                Exponential.rhs(t, &y, &mut f);
                y = dop853_step(&Exponential, t, &y, &f, h).y;
                t += h;
            }
            (y[0] - 1f64.exp()).abs()
        };
        let ratio = err(4) / err(8);
        assert!(ratio > 150.0 && ratio < 400.0, "ratio = {ratio}");
    }

    #[test]
    fn rejects_bad_tolerances() {
        assert!(Tolerances::new(0.0, 1e-12).is_err());
        assert!(Tolerances::new(1e-10, f64::NAN).is_err());
    }
}
