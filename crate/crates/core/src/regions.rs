//! High-SNR outage regions as explicit predicates over channel exponents, and
//! a brute-force minimizer of the exponent sum over those regions.
//!
//! The minimizer knows nothing about the closed forms; it is the reference the
//! analytic module is checked against.
//!
//! Notation inside predicates: `x = gamma11`, `y = gamma21`, `z = gamma22`,
//! `n` is the round count of the region, `p = [1 - x]^+`, `q = [beta - y]^+`.
//! Strict outage inequalities `< rate` are evaluated as `<= rate - 1e-12`.
//!
//! Search strategy. Every RX1 region is up-closed in `x` (a weaker direct link
//! never leaves outage), so for a fixed `y` the smallest member `x` is found by
//! bisection. The outer `y` dimension is scanned on a grid and the best local
//! minima are refined on successively finer grids. RX2 regions are 1-D and
//! monotone, so plain bisection is exact. Cooperative regions add an outer
//! sweep over the listening fraction `f`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::SchemeId;
use crate::error::{Error, Result};
use crate::types::{pp, Exponent, ExponentPoint, SystemParams};

const EDGE: f64 = 1e-12;
const BISECT_ITERS: u32 = 44;
/// Local minima carried into each refinement.
const CANDIDATES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionKind {
    /// RX2 under rate splitting.
    Rx2Hk,
    /// RX1 individual constraint, RX2 first ACK at round `i`.
    O11Hk(u32),
    /// RX1 joint constraint, RX2 first ACK at round `i`.
    O12Hk(u32),
    Rx1Cmo,
    Rx2Cmo,
    /// RX1 when TX2's signal is treated as noise in every round.
    Rx1Tian,
    /// RX1 outage with a per-realization choice of CMO or TIAN decoding.
    Rx1Dd,
    O1Coop,
    O2Coop,
    O3Coop,
    O11Dd,
    O12Dd,
    /// Stop-both policy: no TX2 signal after its ACK.
    O11Stop(u32),
    O12Stop(u32),
}

impl RegionKind {
    pub fn is_coop(self) -> bool {
        matches!(
            self,
            RegionKind::O1Coop | RegionKind::O2Coop | RegionKind::O3Coop | RegionKind::O11Dd | RegionKind::O12Dd
        )
    }

    pub fn is_rx2(self) -> bool {
        matches!(self, RegionKind::Rx2Hk | RegionKind::Rx2Cmo)
    }

    fn ack_round(self) -> Option<u32> {
        match self {
            RegionKind::O11Hk(i) | RegionKind::O12Hk(i) | RegionKind::O11Stop(i) | RegionKind::O12Stop(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionKind::Rx2Hk => f.write_str("O_RX2_HK"),
            RegionKind::O11Hk(i) => write!(f, "O11_HK({i})"),
            RegionKind::O12Hk(i) => write!(f, "O12_HK({i})"),
            RegionKind::Rx1Cmo => f.write_str("O_RX1_CMO"),
            RegionKind::Rx2Cmo => f.write_str("O_RX2_CMO"),
            RegionKind::Rx1Tian => f.write_str("O_RX1_TIAN"),
            RegionKind::Rx1Dd => f.write_str("O_RX1_DD"),
            RegionKind::O1Coop => f.write_str("O1_COOP"),
            RegionKind::O2Coop => f.write_str("O2_COOP"),
            RegionKind::O3Coop => f.write_str("O3_COOP"),
            RegionKind::O11Dd => f.write_str("O11_DD"),
            RegionKind::O12Dd => f.write_str("O12_DD"),
            RegionKind::O11Stop(i) => write!(f, "O11_STOP({i})"),
            RegionKind::O12Stop(i) => write!(f, "O12_STOP({i})"),
        }
    }
}

impl FromStr for RegionKind {
    type Err = Error;

    /// Parses the identifiers produced by `Display`, e.g. `O12_HK(2)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let unknown = || Error::InvalidArgument(format!("unknown region id '{s}'"));
        let (name, idx) = match s.split_once('(') {
            Some((name, rest)) => {
                let digits = rest.strip_suffix(')').ok_or_else(unknown)?;
                (name, Some(digits.parse::<u32>().map_err(|_| unknown())?))
            }
            None => (s, None),
        };
        let kind = match (name, idx) {
            ("O_RX2_HK", None) => RegionKind::Rx2Hk,
            ("O11_HK", Some(i)) => RegionKind::O11Hk(i),
            ("O12_HK", Some(i)) => RegionKind::O12Hk(i),
            ("O_RX1_CMO", None) => RegionKind::Rx1Cmo,
            ("O_RX2_CMO", None) => RegionKind::Rx2Cmo,
            ("O_RX1_TIAN", None) => RegionKind::Rx1Tian,
            ("O_RX1_DD", None) => RegionKind::Rx1Dd,
            ("O1_COOP", None) => RegionKind::O1Coop,
            ("O2_COOP", None) => RegionKind::O2Coop,
            ("O3_COOP", None) => RegionKind::O3Coop,
            ("O11_DD", None) => RegionKind::O11Dd,
            ("O12_DD", None) => RegionKind::O12Dd,
            ("O11_STOP", Some(i)) => RegionKind::O11Stop(i),
            ("O12_STOP", Some(i)) => RegionKind::O12Stop(i),
            _ => return Err(unknown()),
        };
        Ok(kind)
    }
}

/// One high-SNR outage event: a region kind bound to an operating point and
/// a round count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageRegion {
    pub kind: RegionKind,
    pub params: SystemParams,
    pub rounds: u32,
}

impl OutageRegion {
    pub fn new(kind: RegionKind, params: SystemParams, rounds: u32) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::Domain("region needs at least one round".into()));
        }
        if let Some(i) = kind.ack_round() {
            if i == 0 || i > rounds {
                return Err(Error::IndexOutOfRange(format!("{kind}: ACK round outside 1..={rounds}")));
            }
        }
        if kind.is_coop() && rounds != 2 {
            return Err(Error::Domain(format!("{kind} is defined for two rounds only")));
        }
        Ok(Self { kind, params, rounds })
    }

    /// Membership with `f` only consulted by cooperative regions.
    #[inline]
    fn member(&self, x: f64, y: f64, f: f64) -> bool {
        let p = &self.params;
        let n = f64::from(self.rounds);
        let px = pp(1.0 - x);
        let qy = pp(p.beta - y);
        let r1 = p.r1 - EDGE;
        match self.kind {
            RegionKind::O11Hk(i) | RegionKind::O11Stop(i) => {
                let i = f64::from(i);
                let c = pp(p.beta - y - p.b);
                i * pp(1.0 - x - c) + (n - i) * px <= r1
            }
            RegionKind::O12Hk(i) | RegionKind::O12Stop(i) => {
                let post = if matches!(self.kind, RegionKind::O12Hk(_)) { px.max(qy) } else { px };
                let i = f64::from(i);
                let c = pp(p.beta - y - p.b);
                i * pp((1.0 - x).max(p.beta - y) - c) + (n - i) * post <= p.r1 + p.t2 - EDGE
            }
            RegionKind::Rx1Cmo => cmo_rx1(n, px, qy, p),
            RegionKind::Rx1Tian => n * pp(1.0 - x - qy) <= r1,
            RegionKind::Rx1Dd => cmo_rx1(n, px, qy, p) && n * pp(1.0 - x - qy) <= r1,
            RegionKind::O1Coop => o1(f, px, qy, r1),
            RegionKind::O2Coop => o2(f, px, qy, p.r1 + p.r2 - EDGE),
            RegionKind::O3Coop => o3(f, x, px, qy, r1),
            RegionKind::O11Dd => o1(f, px, qy, r1) && o3(f, x, px, qy, r1),
            RegionKind::O12Dd => o2(f, px, qy, p.r1 + p.r2 - EDGE) && o3(f, x, px, qy, r1),
            RegionKind::Rx2Hk | RegionKind::Rx2Cmo => unreachable!("RX2 regions are 1-D"),
        }
    }

    #[inline]
    fn member_rx2(&self, z: f64) -> bool {
        let p = &self.params;
        let n = f64::from(self.rounds);
        let whole = n * pp(1.0 - z) <= p.r2 - EDGE;
        match self.kind {
            RegionKind::Rx2Cmo => whole,
            RegionKind::Rx2Hk => whole || n * pp(1.0 - z - p.b) <= p.s2() - EDGE,
            _ => unreachable!("RX1 regions are 2-D"),
        }
    }
}

#[inline]
fn cmo_rx1(n: f64, px: f64, qy: f64, p: &SystemParams) -> bool {
    n * px <= p.r1 - EDGE || n * px.max(qy) <= p.r1 + p.r2 - EDGE
}

#[inline]
fn o1(f: f64, px: f64, qy: f64, r1: f64) -> bool {
    (1.0 + f) * px + (1.0 - f) * px.max(qy) <= r1
}

#[inline]
fn o2(f: f64, px: f64, qy: f64, r12: f64) -> bool {
    (2.0 - f) * px.max(qy) + f * px <= r12
}

#[inline]
fn o3(f: f64, x: f64, px: f64, qy: f64, r1: f64) -> bool {
    pp(1.0 - x - qy) + f * px + (1.0 - f) * px.max(qy) <= r1
}

/// Exact membership test of `pt` in `region`.
///
/// RX2 regions read `gamma22`; cooperative regions read `f` as well as the
/// RX1 exponents; all others read `gamma11` and `gamma21` only.
pub fn region_contains(region: &OutageRegion, pt: &ExponentPoint) -> Result<bool> {
    let OutageRegion { kind, rounds, .. } = *region;
    // Re-run constructor checks so hand-built regions are also validated.
    OutageRegion::new(kind, region.params, rounds)?;
    if kind.is_rx2() {
        Ok(region.member_rx2(pt.gamma22))
    } else {
        if kind.is_coop() && !(0.0..=1.0).contains(&pt.f) {
            return Err(Error::Domain(format!("listening fraction {} outside [0, 1]", pt.f)));
        }
        Ok(region.member(pt.gamma11, pt.gamma21, pt.f))
    }
}

/// Search settings of the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Grid resolution of the final `gamma21` scan.
    pub gamma_step: f64,
    /// Upper bound of every exponent searched; `None` means `max(1, beta) + 0.5`.
    pub gamma_cap: Option<f64>,
    /// Resolution the listening fraction is refined to.
    pub f_step: f64,
    /// Local refinement passes, each shrinking the step tenfold.
    pub refine_rounds: u32,
    /// Rates below this are raised to it before searching.
    pub rate_floor: f64,
    /// Coarse step of the pre-scan used before refinement (both `gamma21`
    /// and `f` in the cooperative search).
    pub scan_step: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { gamma_step: 1e-3, gamma_cap: None, f_step: 1e-3, refine_rounds: 2, rate_floor: 1e-3, scan_step: 1e-2 }
    }
}

impl OracleConfig {
    /// Default config with the cap fixed for `p`.
    pub fn for_params(p: &SystemParams) -> Self {
        Self { gamma_cap: Some(default_cap(p.beta)), ..Self::default() }
    }

    pub fn cap(&self, beta: f64) -> f64 {
        self.gamma_cap.unwrap_or_else(|| default_cap(beta))
    }

    pub fn validate(&self, beta: f64) -> Result<()> {
        let positive = [
            ("gamma_step", self.gamma_step),
            ("f_step", self.f_step),
            ("rate_floor", self.rate_floor),
            ("scan_step", self.scan_step),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive (got {v})")));
            }
        }
        let cap = self.cap(beta);
        if !(cap > beta.max(1.0)) {
            return Err(Error::InvalidArgument(format!(
                "gamma_cap {cap} must exceed max(1, beta) = {}",
                beta.max(1.0)
            )));
        }
        Ok(())
    }
}

fn default_cap(beta: f64) -> f64 {
    beta.max(1.0) + 0.5
}

/// Raise `r1`, `r2` to the rate floor; the private rate keeps its value.
fn floored(p: &SystemParams, cfg: &OracleConfig) -> SystemParams {
    let r2 = p.r2.max(cfg.rate_floor);
    SystemParams { r1: p.r1.max(cfg.rate_floor), r2, t2: (r2 - p.s2()).max(0.0), ..*p }
}

/// Smallest `x` in `[0, cap]` with `member(x)`, assuming up-closure.
#[inline]
fn bisect_min(cap: f64, member: impl Fn(f64) -> bool) -> f64 {
    if !member(cap) {
        return f64::INFINITY;
    }
    if member(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if member(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn grid(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let last_on_grid = lo + n as f64 * step >= hi - 1e-12;
    (0..=n).map(move |k| (lo + k as f64 * step).min(hi)).chain((!last_on_grid).then_some(hi))
}

/// Minimize `g` over `[lo, hi]`: scan with `step`, then refine the best
/// local minima `rounds` times on tenfold finer grids. `history` receives the
/// incumbent after the scan and after each pass.
fn scan_refine(
    lo: f64,
    hi: f64,
    step: f64,
    rounds: u32,
    g: impl Fn(f64) -> f64,
    mut history: Option<&mut Vec<f64>>,
) -> (f64, f64) {
    let samples: Vec<(f64, f64)> = grid(lo, hi, step).map(|t| (t, g(t))).collect();
    let mut best = samples.iter().copied().fold((lo, f64::INFINITY), |acc, s| if s.1 < acc.1 { s } else { acc });
    if let Some(h) = history.as_deref_mut() {
        h.push(best.1);
    }
    let mut cands: Vec<(f64, f64)> = (0..samples.len())
        .filter(|&k| {
            let v = samples[k].1;
            v.is_finite() && (k == 0 || samples[k - 1].1 >= v) && (k + 1 == samples.len() || samples[k + 1].1 >= v)
        })
        .map(|k| samples[k])
        .collect();
    cands.sort_by(|a, b| a.1.total_cmp(&b.1));
    cands.truncate(CANDIDATES);
    // A jump from +inf down to a finite value is not a local minimum in the
    // sampled sense but still needs refinement around the edge.
    if best.1.is_finite() && !cands.iter().any(|c| c.0 == best.0) {
        cands.push(best);
    }

    let mut h = step;
    for _ in 0..rounds {
        let fine = h / 10.0;
        for c in cands.iter_mut() {
            let (a, b) = ((c.0 - h).max(lo), (c.0 + h).min(hi));
            for t in grid(a, b, fine) {
                let v = g(t);
                if v < c.1 {
                    *c = (t, v);
                }
            }
            if c.1 < best.1 {
                best = *c;
            }
        }
        h = fine;
        if let Some(hist) = history.as_deref_mut() {
            hist.push(best.1);
        }
    }
    best
}

/// Inner 2-D minimum of `x + y` over an RX1 region at a fixed `f`.
fn min_xy(region: &OutageRegion, f: f64, cap: f64, step: f64, rounds: u32, hist: Option<&mut Vec<f64>>) -> f64 {
    let g = |y: f64| y + bisect_min(cap, |x| region.member(x, y, f));
    scan_refine(0.0, cap, step, rounds, g, hist).1
}

fn min_coop(region: &OutageRegion, cfg: &OracleConfig) -> f64 {
    let r1 = region.params.r1;
    let cap = cfg.cap(region.params.beta);
    if r1 >= 1.0 {
        return min_xy(region, 1.0, cap, cfg.gamma_step, cfg.refine_rounds, None);
    }
    let coarse = cfg.scan_step.max(cfg.gamma_step);
    // Inner search during the f sweep: coarse grid, refined one extra pass
    // so its resolution is at least that of the final scan.
    let inner_rounds = cfg.refine_rounds + 1;
    let outer = |f: f64| (1.0 - r1 / f).max(0.0) + min_xy(region, f, cap, coarse, inner_rounds, None);
    let f_rounds = ((cfg.scan_step / cfg.f_step).log10().ceil().max(0.0) as u32).max(cfg.refine_rounds);
    let f_coarse = cfg.scan_step.max(cfg.f_step);
    let (f_best, v_coarse) = scan_refine(r1, 1.0, f_coarse, f_rounds, outer, None);
    let fine = (1.0 - r1 / f_best).max(0.0) + min_xy(region, f_best, cap, cfg.gamma_step, cfg.refine_rounds, None);
    fine.min(v_coarse)
}

/// Minimum exponent of `region`: `gamma11 + gamma21` for RX1 regions (plus
/// the listening exponent `u` for cooperative ones), `gamma22` for RX2
/// regions. `+inf` when the region is empty.
pub fn oracle_min_exponent(region: &OutageRegion, cfg: &OracleConfig) -> Exponent {
    Exponent::clamp(raw_min(region, cfg))
}

fn raw_min(region: &OutageRegion, cfg: &OracleConfig) -> f64 {
    let region = OutageRegion { params: floored(&region.params, cfg), ..*region };
    let cap = cfg.cap(region.params.beta);
    if region.kind.is_rx2() {
        return bisect_min(cap, |z| region.member_rx2(z));
    }
    if region.kind.is_coop() {
        return min_coop(&region, cfg);
    }
    min_xy(&region, 1.0, cap, cfg.gamma_step, cfg.refine_rounds, None)
}

/// Incumbent minimum after the initial scan and after each refinement pass
/// of a 2-D (non-cooperative RX1) search.
pub fn oracle_refinement_history(region: &OutageRegion, cfg: &OracleConfig) -> Result<Vec<f64>> {
    if region.kind.is_rx2() || region.kind.is_coop() {
        return Err(Error::InvalidArgument(format!("{} has no 2-D refinement history", region.kind)));
    }
    let region = OutageRegion { params: floored(&region.params, cfg), ..*region };
    let mut hist = Vec::new();
    let cap = cfg.cap(region.params.beta);
    min_xy(&region, 1.0, cap, cfg.gamma_step, cfg.refine_rounds, Some(&mut hist));
    Ok(hist)
}

/// Cooperative regions minimize `gamma11 + gamma21 + u(f)` over the listening
/// fraction `f in [r1, 1]` with `u = 1 - r1/f`.
pub fn oracle_min_exponent_coop(region: &OutageRegion, cfg: &OracleConfig) -> Result<Exponent> {
    if !region.kind.is_coop() {
        return Err(Error::InvalidArgument(format!("{} is not a cooperative region", region.kind)));
    }
    Ok(oracle_min_exponent(region, cfg))
}

fn region(kind: RegionKind, p: &SystemParams, rounds: u32) -> OutageRegion {
    OutageRegion { kind, params: *p, rounds }
}

fn raw_of(kind: RegionKind, p: &SystemParams, rounds: u32, cfg: &OracleConfig) -> f64 {
    raw_min(&region(kind, p, rounds), cfg)
}

/// Sum over the dominant ACK round: RX2 fails the first `i - 1` rounds, then
/// RX1 is in outage given that history.
fn ack_round_sum(p: &SystemParams, cfg: &OracleConfig, prefix_kind: RegionKind, rx1: impl Fn(u32) -> f64) -> f64 {
    (1..=p.max_rounds)
        .map(|i| {
            let prefix = if i == 1 { 0.0 } else { raw_of(prefix_kind, p, i - 1, cfg) };
            if prefix.is_infinite() {
                f64::INFINITY
            } else {
                prefix + rx1(i)
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Oracle RX1 exponent of the rate-splitting protocol.
pub fn oracle_d1_hk(p: &SystemParams, cfg: &OracleConfig) -> Exponent {
    let l = p.max_rounds;
    Exponent::clamp(ack_round_sum(p, cfg, RegionKind::Rx2Hk, |i| {
        raw_of(RegionKind::O11Hk(i), p, l, cfg).min(raw_of(RegionKind::O12Hk(i), p, l, cfg))
    }))
}

/// Oracle RX1 exponent when TX2 goes silent after RX2's ACK.
pub fn oracle_d1_hk_stop(p: &SystemParams, cfg: &OracleConfig) -> Exponent {
    let l = p.max_rounds;
    Exponent::clamp(ack_round_sum(p, cfg, RegionKind::Rx2Hk, |i| {
        raw_of(RegionKind::O11Stop(i), p, l, cfg).min(raw_of(RegionKind::O12Stop(i), p, l, cfg))
    }))
}

/// Oracle RX1 exponent when TX2 keeps both parts for all `L` rounds.
pub fn oracle_d1_hk_keep(p: &SystemParams, cfg: &OracleConfig) -> Exponent {
    let l = p.max_rounds;
    Exponent::clamp(raw_of(RegionKind::O11Hk(l), p, l, cfg).min(raw_of(RegionKind::O12Hk(l), p, l, cfg)))
}

/// Oracle RX1 exponent of interference-as-noise decoding: the individual
/// region with no power split, summed with an unsplit RX2 prefix.
pub fn oracle_d1_tian(p: &SystemParams, cfg: &OracleConfig) -> Exponent {
    let q = SystemParams { t2: 0.0, b: 0.0, ..*p };
    let l = p.max_rounds;
    Exponent::clamp(ack_round_sum(&q, cfg, RegionKind::Rx2Cmo, |i| raw_of(RegionKind::O11Hk(i), &q, l, cfg)))
}

/// Named components of an oracle evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleDmt {
    pub d1: Exponent,
    pub d2: Exponent,
    /// Sub-exponents (e.g. `d11`, `d12`) keyed by name.
    pub parts: Vec<(&'static str, Exponent)>,
}

fn coop_d2(round1_kind: RegionKind, p: &SystemParams, cfg: &OracleConfig) -> f64 {
    let round1 = raw_of(round1_kind, p, 1, cfg);
    let rx2_once = raw_of(RegionKind::Rx2Cmo, p, 1, cfg);
    let rx2_twice = raw_of(RegionKind::Rx2Cmo, p, 2, cfg);
    (round1 + rx2_once).min(rx2_twice)
}

/// Oracle counterpart of [`crate::analytic::evaluate`].
pub fn oracle_dmt(scheme: SchemeId, p: &SystemParams, cfg: &OracleConfig) -> Result<OracleDmt> {
    let p = crate::types::validate(*p)?;
    scheme.check_rounds(p.max_rounds)?;
    cfg.validate(p.beta)?;
    let l = p.max_rounds;
    let e = Exponent::clamp;
    let coop = |k: RegionKind| raw_of(k, &p, 2, cfg);
    let out = match scheme {
        SchemeId::Hk => {
            let d1 = oracle_d1_hk(&p, cfg);
            OracleDmt { d1, d2: e(raw_of(RegionKind::Rx2Hk, &p, l, cfg)), parts: vec![("d1", d1)] }
        }
        SchemeId::HkKeep => {
            let d1 = oracle_d1_hk_keep(&p, cfg);
            OracleDmt { d1, d2: e(raw_of(RegionKind::Rx2Hk, &p, l, cfg)), parts: vec![("d1", d1)] }
        }
        SchemeId::HkStop => {
            let d1 = oracle_d1_hk_stop(&p, cfg);
            OracleDmt { d1, d2: e(raw_of(RegionKind::Rx2Hk, &p, l, cfg)), parts: vec![("d1", d1)] }
        }
        SchemeId::Cmo => {
            let d1 = e(raw_of(RegionKind::Rx1Cmo, &p, l, cfg));
            OracleDmt { d1, d2: e(raw_of(RegionKind::Rx2Cmo, &p, l, cfg)), parts: vec![("d1", d1)] }
        }
        SchemeId::Tian => {
            let d1 = oracle_d1_tian(&p, cfg);
            OracleDmt { d1, d2: e(raw_of(RegionKind::Rx2Cmo, &p, l, cfg)), parts: vec![("d1", d1)] }
        }
        SchemeId::CoopCmo => {
            let (d11, d12) = (coop(RegionKind::O1Coop), coop(RegionKind::O2Coop));
            OracleDmt {
                d1: e(d11.min(d12)),
                d2: e(coop_d2(RegionKind::Rx1Cmo, &p, cfg)),
                parts: vec![("d11", e(d11)), ("d12", e(d12))],
            }
        }
        SchemeId::CoopTian => {
            let d1 = e(coop(RegionKind::O3Coop));
            OracleDmt { d1, d2: e(coop_d2(RegionKind::Rx1Tian, &p, cfg)), parts: vec![("d1", d1)] }
        }
        SchemeId::CoopDd => {
            let (d11, d12) = (coop(RegionKind::O11Dd), coop(RegionKind::O12Dd));
            OracleDmt {
                d1: e(d11.min(d12)),
                d2: e(coop_d2(RegionKind::Rx1Dd, &p, cfg)),
                parts: vec![("d11", e(d11)), ("d12", e(d12))],
            }
        }
        SchemeId::CoopStatic => {
            let cmo = coop(RegionKind::O1Coop).min(coop(RegionKind::O2Coop));
            let tian = coop(RegionKind::O3Coop);
            let d2_cmo = coop_d2(RegionKind::Rx1Cmo, &p, cfg);
            let d2_tian = coop_d2(RegionKind::Rx1Tian, &p, cfg);
            let (d1, d2) = if cmo >= tian { (cmo, d2_cmo) } else { (tian, d2_tian) };
            OracleDmt {
                d1: e(d1),
                d2: e(d2),
                parts: vec![("d1_cmo", e(cmo)), ("d1_tian", e(tian)), ("d2_cmo", e(d2_cmo)), ("d2_tian", e(d2_tian))],
            }
        }
    };
    Ok(out)
}

/// Result of [`rate_region_subset_check`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubsetReport {
    pub samples: usize,
    /// Points decodable under keep-both but not under the ACK-driven policy.
    pub keep_counterexamples: Vec<ExponentPoint>,
    /// Points decodable under stop-both but not under the ACK-driven policy.
    pub stop_counterexamples: Vec<ExponentPoint>,
}

impl SubsetReport {
    pub fn is_empty(&self) -> bool {
        self.keep_counterexamples.is_empty() && self.stop_counterexamples.is_empty()
    }
}

/// Sample exponent points and confirm that the success regions of the
/// keep-both and stop-both policies are contained in that of the policy
/// which drops only the private part after RX2's ACK.
///
/// For each point the ACK round `i` is the first round in which RX2 leaves
/// outage (or `L` if it never does).
pub fn rate_region_subset_check(p: &SystemParams, samples: usize, seed: u64) -> Result<SubsetReport> {
    let p = crate::types::validate(*p)?;
    let l = p.max_rounds;
    let cap = default_cap(p.beta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SubsetReport { samples, ..Default::default() };
    for _ in 0..samples {
        let pt = ExponentPoint::new(
            rng.random_range(0.0..=cap),
            rng.random_range(0.0..=cap),
            rng.random_range(0.0..=cap),
            0.0,
            1.0,
        );
        let i = (1..=l).find(|&n| !region(RegionKind::Rx2Hk, &p, n).member_rx2(pt.gamma22)).unwrap_or(l);
        let out = |a: RegionKind, b: RegionKind| {
            region(a, &p, l).member(pt.gamma11, pt.gamma21, 1.0) || region(b, &p, l).member(pt.gamma11, pt.gamma21, 1.0)
        };
        let policy_ok = !out(RegionKind::O11Hk(i), RegionKind::O12Hk(i));
        let keep_ok = !out(RegionKind::O11Hk(l), RegionKind::O12Hk(l));
        let stop_ok = !out(RegionKind::O11Stop(i), RegionKind::O12Stop(i));
        if keep_ok && !policy_ok {
            report.keep_counterexamples.push(pt);
        }
        if stop_ok && !policy_ok {
            report.stop_counterexamples.push(pt);
        }
    }
    Ok(report)
}
