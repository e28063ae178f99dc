//! Closed-form diversity exponents for the non-cooperative (HK, CMO, TIAN)
//! and two-round cooperative (static CMO/TIAN, dynamic decoding) protocols.
//!
//! Every formula is evaluated branch by branch and records the branch it took
//! in a [`BranchTrace`], so a disagreement with the oracle can be traced back
//! to a specific piece of a piecewise expression.
//!
//! Conventions: `[x]^+` is [`pos_part`](crate::types::pos_part); divisions by a
//! round count that may be zero go through [`ext_div`]. At exactly-zero rates
//! the formulas return their limiting values.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::regions::{self, OracleConfig};
use crate::types::{ext_div, pp, validate, Exponent, SystemParams};

/// Protocol / decoder combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    /// Rate splitting; TX2 drops its private part after RX2's ACK.
    Hk,
    /// Rate splitting; TX2 keeps sending both parts for all rounds.
    HkKeep,
    /// Rate splitting; TX2 goes silent after RX2's ACK.
    HkStop,
    Cmo,
    Tian,
    CoopCmo,
    CoopTian,
    CoopStatic,
    CoopDd,
}

impl SchemeId {
    pub const ALL: [SchemeId; 9] = [
        SchemeId::Hk,
        SchemeId::HkKeep,
        SchemeId::HkStop,
        SchemeId::Cmo,
        SchemeId::Tian,
        SchemeId::CoopCmo,
        SchemeId::CoopTian,
        SchemeId::CoopStatic,
        SchemeId::CoopDd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Hk => "hk",
            SchemeId::HkKeep => "hk-keep",
            SchemeId::HkStop => "hk-stop",
            SchemeId::Cmo => "cmo",
            SchemeId::Tian => "tian",
            SchemeId::CoopCmo => "coop-cmo",
            SchemeId::CoopTian => "coop-tian",
            SchemeId::CoopStatic => "coop-static",
            SchemeId::CoopDd => "coop-dd",
        }
    }

    pub fn is_coop(self) -> bool {
        matches!(self, SchemeId::CoopCmo | SchemeId::CoopTian | SchemeId::CoopStatic | SchemeId::CoopDd)
    }

    /// Comma-separated list of every accepted name, for usage messages.
    pub fn valid_names() -> String {
        Self::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
    }

    /// Reject cooperative schemes unless `L = 2`.
    pub fn check_rounds(self, max_rounds: u32) -> Result<()> {
        if self.is_coop() && max_rounds != 2 {
            return Err(Error::Domain(format!(
                "cooperative schemes require L=2 ({} given L={max_rounds})",
                self.name()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL.iter().copied().find(|id| id.name() == key).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown scheme '{s}'; valid schemes: {}", Self::valid_names()))
        })
    }
}

/// One evaluated piece of a piecewise formula.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchTrace {
    pub formula: &'static str,
    pub round: Option<u32>,
    pub branch: &'static str,
    pub value: f64,
}

impl fmt::Display for BranchTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.round {
            Some(i) => write!(f, "{}[i={}]:{}", self.formula, i, self.branch),
            None => write!(f, "{}:{}", self.formula, self.branch),
        }
    }
}

/// Where a reported exponent came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Analytic,
    Oracle,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmtResult {
    pub d1: Exponent,
    pub d2: Exponent,
    pub source: Source,
    pub branch_trace: Vec<BranchTrace>,
}

impl DmtResult {
    /// The active branches joined with `;` (no commas, CSV-safe).
    pub fn branch_summary(&self) -> String {
        self.branch_trace.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(";")
    }
}

/// Collects branch records while a formula is evaluated.
#[derive(Debug, Default)]
struct Trace(Vec<BranchTrace>);

impl Trace {
    fn note(&mut self, formula: &'static str, round: Option<u32>, branch: &'static str, value: f64) -> f64 {
        self.0.push(BranchTrace { formula, round, branch, value });
        value
    }
}

fn check_round(p: &SystemParams, i: u32) -> Result<()> {
    if i == 0 || i > p.max_rounds {
        return Err(Error::IndexOutOfRange(format!("round index {i} outside 1..={}", p.max_rounds)));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Non-cooperative schemes
// ---------------------------------------------------------------------------

/// Exponent of "RX2 still in outage after `i - 1` rounds". Before round 1
/// the event is certain, so `i = 1` contributes 0 even at zero rate.
fn ack_prefix(i: u32, after: impl Fn(u32) -> f64) -> f64 {
    if i == 1 {
        0.0
    } else {
        after(i - 1)
    }
}

/// RX2 exponent under rate splitting after `rounds` rounds. `rounds = 0` is
/// the empty prefix: exponent 0 for any positive rate.
pub fn d2_hk_rounds(p: &SystemParams, rounds: u32) -> Exponent {
    let n = f64::from(rounds);
    let whole = pp(1.0 - ext_div(p.r2, n));
    let private = pp(1.0 - ext_div(p.s2(), n) - p.b);
    Exponent::clamp(whole.min(private))
}

pub fn d2_hk(p: &SystemParams) -> Exponent {
    d2_hk_rounds(p, p.max_rounds)
}

fn d11_hk_t(p: &SystemParams, i: u32, tr: &mut Trace) -> f64 {
    let l = f64::from(p.max_rounds);
    let fi = f64::from(i);
    let clean = pp(1.0 - ext_div(p.r1, l - fi));
    let interfered = pp(1.0 - (p.r1 + fi * pp(p.beta - p.b)) / l);
    if clean >= interfered {
        tr.note("d11_hk", Some(i), "post-ack", clean)
    } else {
        tr.note("d11_hk", Some(i), "interfered", interfered)
    }
}

/// Individual-constraint exponent for RX1 given RX2 first ACKs in round `i`.
pub fn d11_hk(p: &SystemParams, i: u32) -> Result<Exponent> {
    check_round(p, i)?;
    Ok(Exponent::clamp(d11_hk_t(p, i, &mut Trace::default())))
}

fn d12_hk_t(p: &SystemParams, i: u32, tr: &mut Trace) -> f64 {
    let l = f64::from(p.max_rounds);
    let fi = f64::from(i);
    let rate = p.r1 + p.t2;
    if rate <= l * p.b {
        let m = rate / l;
        return tr.note("d12_hk", Some(i), "low-rate", pp(1.0 - m) + pp(p.beta - m));
    }
    if rate >= (l - fi) * p.beta + fi * p.b {
        let v = pp(1.0 - (rate + fi * pp(p.beta - p.b)) / l);
        return tr.note("d12_hk", Some(i), "high-rate", v);
    }
    // Here i < L: at i = L the previous test always fires.
    let m = (rate - fi * p.b) / (l - fi);
    tr.note("d12_hk", Some(i), "mid-rate", pp(1.0 - m) + pp(p.beta - m))
}

/// Joint-constraint exponent for RX1 given RX2 first ACKs in round `i`.
pub fn d12_hk(p: &SystemParams, i: u32) -> Result<Exponent> {
    check_round(p, i)?;
    Ok(Exponent::clamp(d12_hk_t(p, i, &mut Trace::default())))
}

fn d1_hk_t(p: &SystemParams, tr: &mut Trace) -> f64 {
    let mut best = f64::INFINITY;
    let mut best_i = 1;
    let mut inner = Trace::default();
    let mut best_inner = Vec::new();
    for i in 1..=p.max_rounds {
        inner.0.clear();
        let prefix = ack_prefix(i, |n| d2_hk_rounds(p, n).value());
        let v = prefix + d11_hk_t(p, i, &mut inner).min(d12_hk_t(p, i, &mut inner));
        if v < best {
            best = v;
            best_i = i;
            best_inner = std::mem::take(&mut inner.0);
        }
    }
    tr.note("d1_hk", Some(best_i), "argmin", best);
    tr.0.extend(best_inner);
    best
}

/// RX1 exponent under rate splitting with the "drop private after ACK" policy.
pub fn d1_hk(p: &SystemParams) -> Exponent {
    Exponent::clamp(d1_hk_t(p, &mut Trace::default()))
}

/// Minimum exponent of RX1's CMO outage region over `rounds` rounds.
pub fn d1_cmo(p: &SystemParams, rounds: u32) -> Exponent {
    Exponent::clamp(d1_cmo_raw(p.r1, p.r2, p.beta, rounds))
}

fn d1_cmo_raw(r1: f64, r2: f64, beta: f64, rounds: u32) -> f64 {
    let n = f64::from(rounds);
    let s = (r1 + r2) / n;
    pp(1.0 - r1 / n).min(pp(1.0 - s) + pp(beta - s))
}

pub fn d2_cmo(p: &SystemParams, rounds: u32) -> Exponent {
    Exponent::clamp(pp(1.0 - p.r2 / f64::from(rounds)))
}

/// RX1 exponent when interference is treated as noise, in the closed form
/// obtained by fixing the ACK round at `i = 1`.
pub fn d1_tian(p: &SystemParams, rounds: u32) -> Exponent {
    Exponent::clamp(d1_tian_raw(p.r1, p.beta, rounds))
}

fn d1_tian_raw(r1: f64, beta: f64, rounds: u32) -> f64 {
    let n = f64::from(rounds);
    pp(1.0 - ext_div(r1, n - 1.0)).max(pp(1.0 - r1 / n - beta / n))
}

fn d1_tian_general_t(p: &SystemParams, tr: &mut Trace) -> f64 {
    let l = f64::from(p.max_rounds);
    let mut best = f64::INFINITY;
    let mut best_i = 1;
    for i in 1..=p.max_rounds {
        let fi = f64::from(i);
        let prefix = ack_prefix(i, |n| pp(1.0 - ext_div(p.r2, f64::from(n))));
        let tail = pp(1.0 - ext_div(p.r1, l - fi)).max(pp(1.0 - (p.r1 + fi * p.beta) / l));
        if prefix + tail < best {
            best = prefix + tail;
            best_i = i;
        }
    }
    tr.note("d1_tian_general", Some(best_i), "argmin", best)
}

/// TIAN RX1 exponent as the full minimum over the RX2 ACK round.
pub fn d1_tian_general(p: &SystemParams) -> Exponent {
    Exponent::clamp(d1_tian_general_t(p, &mut Trace::default()))
}

pub fn d2_tian(p: &SystemParams, rounds: u32) -> Exponent {
    d2_cmo(p, rounds)
}

fn d1_hk_keep_t(p: &SystemParams, tr: &mut Trace) -> f64 {
    if p.r1 == 0.0 {
        tr.note("d1_hk_keep", None, "zero-rate", 0.0);
        return d1_hk_t(p, tr);
    }
    let l = p.max_rounds;
    let v = d11_hk_t(p, l, tr).min(d12_hk_t(p, l, tr));
    tr.note("d1_hk_keep", Some(l), "i=L", v)
}

/// RX1 exponent when TX2 keeps both message parts for all rounds.
pub fn d1_hk_keep(p: &SystemParams) -> Exponent {
    Exponent::clamp(d1_hk_keep_t(p, &mut Trace::default()))
}

/// RX1 exponent when TX2 goes silent after its ACK. No closed form exists;
/// this evaluates the exponent oracle with the default configuration.
pub fn d1_hk_stop(p: &SystemParams) -> Exponent {
    regions::oracle_d1_hk_stop(p, &OracleConfig::for_params(p))
}

// ---------------------------------------------------------------------------
// Cooperative schemes, two rounds
// ---------------------------------------------------------------------------

fn d11c_cmo2_t(r1: f64, beta: f64, tr: &mut Trace) -> f64 {
    if r1 >= 2.0 * beta {
        return tr.note("d11c_cmo2", None, "r1>=2beta", pp(1.0 - r1 / 2.0));
    }
    if r1 >= beta / (1.0 + beta) {
        let v = (1.0 + ((1.0 - r1) * beta - r1) / (1.0 + r1)).min(2.0 - 1.5 * r1);
        return tr.note("d11c_cmo2", None, "mid", v);
    }
    let v = (2.0 - 1.5 * r1).min(2.0 - beta * r1 / (beta - r1)).min(1.0 + beta - r1 / (1.0 - r1));
    tr.note("d11c_cmo2", None, "low", v)
}

/// Cooperative static-CMO exponent of the individual RX1 event.
pub fn d11c_cmo2(r1: f64, beta: f64) -> Exponent {
    Exponent::clamp(d11c_cmo2_t(r1, beta, &mut Trace::default()))
}

fn d12c_cmo2_raw(r1: f64, r2: f64, beta: f64) -> f64 {
    let m = (r1 + r2) / 2.0;
    pp(1.0 - m) + pp(beta - m)
}

/// Cooperative static-CMO exponent of the joint RX1 event.
pub fn d12c_cmo2(r1: f64, r2: f64, beta: f64) -> Exponent {
    Exponent::clamp(d12c_cmo2_raw(r1, r2, beta))
}

fn d1c_cmo2_t(r1: f64, r2: f64, beta: f64, tr: &mut Trace) -> f64 {
    let d11 = d11c_cmo2_t(r1, beta, tr);
    let d12 = tr.note("d12c_cmo2", None, "joint", d12c_cmo2_raw(r1, r2, beta));
    d11.min(d12)
}

pub fn d1c_cmo2(r1: f64, r2: f64, beta: f64) -> Exponent {
    Exponent::clamp(d1c_cmo2_t(r1, r2, beta, &mut Trace::default()))
}

/// RX2 exponent under cooperation given RX1's round-1 exponent `d1_round1`:
/// either RX1 fails round 1 (TX2 relays) and RX2 missed round 1, or RX2 fails
/// both rounds.
fn d2_coop_raw(d1_round1: f64, r2: f64, tr: &mut Trace, formula: &'static str) -> f64 {
    let relayed = d1_round1 + pp(1.0 - r2);
    let twice = pp(1.0 - r2 / 2.0);
    if relayed <= twice {
        tr.note(formula, None, "relay", relayed)
    } else {
        tr.note(formula, None, "two-rounds", twice)
    }
}

pub fn d2c_cmo2(r1: f64, r2: f64, beta: f64) -> Exponent {
    let d = d1_cmo_raw(r1, r2, beta, 1);
    Exponent::clamp(d2_coop_raw(d, r2, &mut Trace::default(), "d2c_cmo2"))
}

fn d1c_tian2_t(r1: f64, beta: f64, tr: &mut Trace) -> f64 {
    if r1 >= beta {
        return tr.note("d1c_tian2", None, "r1>=beta", pp(1.0 - (r1 + beta) / 2.0));
    }
    if r1 < beta / 2.0 && beta >= 1.0 {
        return tr.note("d1c_tian2", None, "r1<beta/2;beta>=1", 2.0 * pp(1.0 - r1));
    }
    if r1 < beta / 2.0 {
        return tr.note("d1c_tian2", None, "r1<beta/2;beta<1", pp(1.0 - r1) + pp(beta - r1));
    }
    if r1 > 0.5 {
        return tr.note("d1c_tian2", None, "r1>1/2", (1.0 - r1) * beta / r1);
    }
    tr.note("d1c_tian2", None, "r1<=1/2", pp(1.0 - r1) + pp(beta - r1))
}

/// Cooperative static-TIAN RX1 exponent.
pub fn d1c_tian2(r1: f64, beta: f64) -> Exponent {
    Exponent::clamp(d1c_tian2_t(r1, beta, &mut Trace::default()))
}

pub fn d2c_tian2(r1: f64, r2: f64, beta: f64) -> Exponent {
    let d = pp(1.0 - r1 - beta);
    Exponent::clamp(d2_coop_raw(d, r2, &mut Trace::default(), "d2c_tian2"))
}

fn static_overall_t(r1: f64, r2: f64, beta: f64, tr: &mut Trace) -> (f64, f64) {
    let cmo = d1c_cmo2_t(r1, r2, beta, tr);
    let tian = d1c_tian2_t(r1, beta, tr);
    if cmo >= tian {
        tr.note("d_static", None, "cmo", cmo);
        (cmo, d2_coop_raw(d1_cmo_raw(r1, r2, beta, 1), r2, tr, "d2c_cmo2"))
    } else {
        tr.note("d_static", None, "tian", tian);
        (tian, d2_coop_raw(pp(1.0 - r1 - beta), r2, tr, "d2c_tian2"))
    }
}

/// Best static decoder: the larger RX1 exponent, with the RX2 exponent of the
/// scheme that attains it. Ties report the CMO value.
pub fn d_static_overall(r1: f64, r2: f64, beta: f64) -> (Exponent, Exponent) {
    let (d1, d2) = static_overall_t(r1, r2, beta, &mut Trace::default());
    (Exponent::clamp(d1), Exponent::clamp(d2))
}

fn d12_dd_t(r1: f64, r2: f64, beta: f64, tr: &mut Trace) -> f64 {
    if r2 >= beta {
        let v = d1c_tian2_t(r1, beta, &mut Trace::default());
        return tr.note("d12_dd", None, "r2>=beta", v);
    }
    if r1 >= r2 {
        return tr.note("d12_dd", None, "r1>=r2", d12c_cmo2_raw(r1, r2, beta));
    }
    if r1 >= 0.5 {
        let v = pp(beta - (2.0 * r1 - 1.0) * r2 / r1);
        return tr.note("d12_dd", None, "1/2<=r1<r2", v);
    }
    tr.note("d12_dd", None, "r1<min(1/2;r2)", pp(1.0 - r1) + pp(beta - r1))
}

/// Dynamic-decoding exponent of the joint RX1 event.
pub fn d12_dd(r1: f64, r2: f64, beta: f64) -> Exponent {
    Exponent::clamp(d12_dd_t(r1, r2, beta, &mut Trace::default()))
}

fn d1c_dd2_t(r1: f64, r2: f64, beta: f64, tr: &mut Trace) -> f64 {
    d11c_cmo2_t(r1, beta, tr).min(d12_dd_t(r1, r2, beta, tr))
}

pub fn d1c_dd2(r1: f64, r2: f64, beta: f64) -> Exponent {
    Exponent::clamp(d1c_dd2_t(r1, r2, beta, &mut Trace::default()))
}

fn d1_dd_round1(r1: f64, r2: f64, beta: f64) -> f64 {
    d1_cmo_raw(r1, r2, beta, 1).max(d1_tian_raw(r1, beta, 1))
}

pub fn d2c_dd2(r1: f64, r2: f64, beta: f64) -> Exponent {
    let d = d1_dd_round1(r1, r2, beta);
    Exponent::clamp(d2_coop_raw(d, r2, &mut Trace::default(), "d2c_dd2"))
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

/// Evaluate both users' exponents for `scheme` at `p`.
pub fn evaluate(scheme: SchemeId, p: &SystemParams) -> Result<DmtResult> {
    let p = validate(*p)?;
    scheme.check_rounds(p.max_rounds)?;
    let mut tr = Trace::default();
    let l = p.max_rounds;
    let (r1, r2, beta) = (p.r1, p.r2, p.beta);
    let mut source = Source::Analytic;
    let (d1, d2) = match scheme {
        SchemeId::Hk => (d1_hk_t(&p, &mut tr), d2_hk(&p).value()),
        SchemeId::HkKeep => (d1_hk_keep_t(&p, &mut tr), d2_hk(&p).value()),
        SchemeId::HkStop => {
            source = Source::Oracle;
            let v = d1_hk_stop(&p).value();
            tr.note("d1_hk_stop", None, "oracle", v);
            (v, d2_hk(&p).value())
        }
        SchemeId::Cmo => {
            let d1 = d1_cmo(&p, l).value();
            let d11 = pp(1.0 - r1 / f64::from(l));
            tr.note("d1_cmo", None, if d11 <= d1 { "individual" } else { "joint" }, d1);
            (d1, d2_cmo(&p, l).value())
        }
        SchemeId::Tian => (d1_tian_general_t(&p, &mut tr), d2_tian(&p, l).value()),
        SchemeId::CoopCmo => {
            let d1 = d1c_cmo2_t(r1, r2, beta, &mut tr);
            (d1, d2_coop_raw(d1_cmo_raw(r1, r2, beta, 1), r2, &mut tr, "d2c_cmo2"))
        }
        SchemeId::CoopTian => {
            let d1 = d1c_tian2_t(r1, beta, &mut tr);
            (d1, d2_coop_raw(pp(1.0 - r1 - beta), r2, &mut tr, "d2c_tian2"))
        }
        SchemeId::CoopStatic => static_overall_t(r1, r2, beta, &mut tr),
        SchemeId::CoopDd => {
            let d1 = d1c_dd2_t(r1, r2, beta, &mut tr);
            (d1, d2_coop_raw(d1_dd_round1(r1, r2, beta), r2, &mut tr, "d2c_dd2"))
        }
    };
    Ok(DmtResult { d1: Exponent::clamp(d1), d2: Exponent::clamp(d2), source, branch_trace: tr.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sp(r1: f64, r2: f64, t2: f64, b: f64, beta: f64, l: u32) -> SystemParams {
        SystemParams::new(r1, r2, t2, b, beta, l)
    }

    fn close(a: Exponent, b: f64) {
        assert!((a.value() - b).abs() < 1e-12, "{} != {b}", a.value());
    }

    #[test]
    fn d2_hk_examples() {
        close(d2_hk(&sp(0.0, 0.0, 0.0, 0.0, 1.0, 2)), 1.0);
        close(d2_hk(&sp(0.0, 0.5, 0.5, 0.2, 1.0, 2)), 0.75);
        close(d2_hk(&sp(0.0, 1.0, 0.0, 0.0, 1.0, 1)), 0.0);
        // empty prefix
        close(d2_hk_rounds(&sp(0.0, 0.4, 0.0, 0.0, 1.0, 2), 0), 0.0);
        close(d2_hk_rounds(&sp(0.0, 0.0, 0.0, 0.0, 1.0, 2), 0), 1.0);
    }

    #[test]
    fn d11_hk_examples() {
        let p = sp(0.3, 0.4, 0.2, 0.1, 0.8, 2);
        close(d11_hk(&p, 1).unwrap(), 0.7);
        close(d11_hk(&p, 2).unwrap(), 0.15);
        close(d11_hk(&sp(0.0, 0.0, 0.0, 0.0, 0.5, 2), 1).unwrap(), 1.0);
        assert!(matches!(d11_hk(&p, 0), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(d11_hk(&p, 3), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn d12_hk_examples() {
        let p = sp(0.3, 0.4, 0.2, 0.1, 0.8, 2);
        close(d12_hk(&p, 1).unwrap(), 1.0);
        close(d12_hk(&p, 2).unwrap(), 0.05);
        close(d12_hk(&sp(0.1, 0.0, 0.0, 0.3, 0.5, 2), 1).unwrap(), 1.4);
        assert!(d12_hk(&p, 5).is_err());
    }

    #[test]
    fn d1_hk_examples() {
        close(d1_hk(&sp(0.3, 0.4, 0.2, 0.1, 0.8, 2)), 0.65);
        close(d1_hk(&sp(0.0, 0.0, 0.0, 0.0, 1.0, 1)), 1.0);
        close(d1_hk(&sp(0.0, 0.0, 0.0, 0.0, 1.0, 2)), 1.0);
        let r = evaluate(SchemeId::Hk, &sp(0.3, 0.4, 0.2, 0.1, 0.8, 2)).unwrap();
        assert_eq!(r.branch_trace[0].round, Some(2));
        assert!(r.branch_summary().contains("d12_hk[i=2]:high-rate"), "{}", r.branch_summary());
    }

    #[test]
    fn cmo_and_tian_examples() {
        close(d1_cmo(&sp(0.5, 0.5, 0.0, 0.0, 1.3, 2), 2), 0.75);
        close(d1_cmo(&sp(0.3, 0.3, 0.0, 0.0, 0.4, 1), 1), 0.4);
        close(d1_cmo(&sp(0.0, 0.0, 0.0, 0.0, 0.9, 2), 2), 1.0);
        close(d2_cmo(&sp(0.0, 0.5, 0.0, 0.0, 1.0, 2), 2), 0.75);
        close(d2_cmo(&sp(0.0, 1.0, 0.0, 0.0, 1.0, 1), 1), 0.0);
        close(d2_cmo(&sp(0.0, 0.0, 0.0, 0.0, 1.0, 4), 4), 1.0);

        close(d1_tian(&sp(0.6, 0.0, 0.0, 0.0, 1.3, 2), 2), 0.4);
        close(d1_tian(&sp(0.9, 0.0, 0.0, 0.0, 0.3, 3), 3), 0.6);
        close(d1_tian(&sp(0.3, 0.0, 0.0, 0.0, 0.5, 1), 1), 0.2);
        close(d1_tian_general(&sp(0.0, 0.5, 0.0, 0.0, 1.0, 2)), 1.0);
        close(d1_tian_general(&sp(0.9, 0.2, 0.0, 0.0, 0.3, 3)), 0.6);
        close(d2_tian(&sp(0.0, 0.9, 0.0, 0.0, 1.0, 2), 2), 0.55);
        close(d2_tian(&sp(0.0, 0.0, 0.0, 0.0, 1.0, 2), 2), 1.0);
        close(d2_tian(&sp(0.0, 1.0, 0.0, 0.0, 1.0, 1), 1), 0.0);
    }

    #[test]
    fn tian_general_can_be_below_closed_form() {
        // With r2 > 0 the minimum over the ACK round is not always at i = 1:
        // i = 2 gives [1 - 0.5]^+ + max{0, [1 - 3.3/2]^+} = 0.5 < 0.7.
        let p = sp(0.3, 0.5, 0.0, 0.0, 1.5, 2);
        close(d1_tian_general(&p), 0.5);
        close(d1_tian(&p, 2), 0.7);
    }

    #[test]
    fn hk_policies() {
        let p = sp(0.3, 0.4, 0.2, 0.1, 0.8, 2);
        close(d1_hk_keep(&p), 0.05);
        let z = sp(0.0, 0.4, 0.2, 0.1, 0.8, 2);
        assert_eq!(d1_hk_keep(&z), d1_hk(&z));
    }

    #[test]
    fn coop_cmo_examples() {
        close(d11c_cmo2(0.8, 0.3), 0.6);
        close(d11c_cmo2(0.2, 1.0), 1.7);
        close(d11c_cmo2(0.0, 1.3), 2.0);
        close(d12c_cmo2(0.4, 0.6, 0.9), 0.9);
        close(d12c_cmo2(0.0, 0.0, 0.5), 1.5);
        close(d12c_cmo2(1.0, 1.0, 0.5), 0.0);
        close(d2c_cmo2(0.3, 0.4, 1.0), 0.8);
        close(d1c_cmo2(0.8, 0.1, 0.3), 0.55);
        close(d2c_cmo2(0.0, 0.0, 1.0), 1.0);
    }

    #[test]
    fn coop_tian_examples() {
        close(d1c_tian2(0.5, 0.4), 0.55);
        close(d1c_tian2(0.1, 1.5), 1.8);
        close(d1c_tian2(0.6, 1.0), 2.0 / 3.0);
        close(d2c_tian2(0.3, 0.4, 0.5), 0.8);
        close(d2c_tian2(0.0, 0.0, 2.0), 1.0);
        // min{[1 - 1]^+ + [1 - 0.1 - 0.2]^+, [1 - 1/2]^+} = min{0.7, 0.5}
        close(d2c_tian2(0.1, 1.0, 0.2), 0.5);
    }

    #[test]
    fn static_overall_examples() {
        let (d1, _) = d_static_overall(0.0, 0.0, 1.0);
        close(d1, 2.0);
        let (d1, _) = d_static_overall(0.05, 0.9, 1.3);
        let want = d1c_cmo2(0.05, 0.9, 1.3).value().max(d1c_tian2(0.05, 1.3).value());
        close(d1, want);
        // tie at r1 = r2 = 0, beta = 1: both give 2 and CMO is reported
        let r = evaluate(SchemeId::CoopStatic, &sp(0.0, 0.0, 0.0, 0.0, 1.0, 2)).unwrap();
        assert!(r.branch_summary().contains("d_static:cmo"), "{}", r.branch_summary());
        let (_, d2) = d_static_overall(0.2, 0.3, 1.0);
        assert_eq!(d2, d2c_tian2(0.2, 0.3, 1.0));
        assert_ne!(d2, d2c_cmo2(0.2, 0.3, 1.0));
    }

    #[test]
    fn dd_examples() {
        close(d12_dd(0.6, 0.8, 0.9), 0.9 - 0.2 * 0.8 / 0.6);
        close(d12_dd(0.3, 0.5, 0.6), 1.0);
        close(d12_dd(0.7, 0.4, 0.9), d12c_cmo2(0.7, 0.4, 0.9).value());
        close(d12_dd(0.2, 0.9, 0.5), d1c_tian2(0.2, 0.5).value());
    }

    #[test]
    fn evaluate_rejects_coop_with_wrong_l() {
        let err = evaluate(SchemeId::CoopDd, &sp(0.3, 0.3, 0.0, 0.0, 1.0, 3)).unwrap_err();
        assert!(err.to_string().contains("cooperative schemes require L=2"));
        assert!(evaluate(SchemeId::Hk, &sp(0.3, 0.2, 0.3, 0.0, 1.0, 2)).is_err());
    }

    #[test]
    fn scheme_names_roundtrip() {
        for s in SchemeId::ALL {
            assert_eq!(s.name().parse::<SchemeId>().unwrap(), s);
        }
        let err = "hk2".parse::<SchemeId>().unwrap_err().to_string();
        assert!(err.contains("coop-dd"), "{err}");
    }

    fn any_params() -> impl Strategy<Value = SystemParams> {
        (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..1.0, 0.0f64..2.5, 1u32..=5)
            .prop_map(|(r1, r2, frac, b, beta, l)| SystemParams::new(r1, r2, r2 * frac, b, beta, l))
    }

    const CHEAP: [SchemeId; 8] = [
        SchemeId::Hk,
        SchemeId::HkKeep,
        SchemeId::Cmo,
        SchemeId::Tian,
        SchemeId::CoopCmo,
        SchemeId::CoopTian,
        SchemeId::CoopStatic,
        SchemeId::CoopDd,
    ];

    proptest! {
        #[test]
        fn exponents_bounded(p in any_params()) {
            for s in CHEAP {
                let p = if s.is_coop() { p.with_rounds(2) } else { p };
                let r = evaluate(s, &p).unwrap();
                for d in [r.d1.value(), r.d2.value()] {
                    prop_assert!(d.is_finite() && d >= 0.0 && d <= 2.0 + p.beta + 1e-12,
                        "{s} at {p:?}: {d}");
                }
                prop_assert!(!r.branch_trace.is_empty());
            }
        }

        #[test]
        fn d1_nonincreasing_in_r1(p in any_params(), dr in 0.0f64..0.5) {
            let q = SystemParams { r1: (p.r1 + dr).min(1.0), ..p };
            let q = SystemParams { t2: q.t2.min(q.r2), ..q };
            for s in CHEAP {
                let (p, q) = if s.is_coop() { (p.with_rounds(2), q.with_rounds(2)) } else { (p, q) };
                let a = evaluate(s, &p).unwrap().d1.value();
                let b = evaluate(s, &q).unwrap().d1.value();
                prop_assert!(b <= a + 1e-12, "{s}: d1({}) = {a} < d1({}) = {b}", p.r1, q.r1);
            }
        }

        #[test]
        fn d2_nonincreasing_in_r2(p in any_params(), dr in 0.0f64..0.5) {
            let q = SystemParams { r2: (p.r2 + dr).min(1.0), ..p };
            for s in CHEAP {
                let (p, q) = if s.is_coop() { (p.with_rounds(2), q.with_rounds(2)) } else { (p, q) };
                let a = evaluate(s, &p).unwrap().d2.value();
                let b = evaluate(s, &q).unwrap().d2.value();
                prop_assert!(b <= a + 1e-12, "{s}: d2 rose from {a} to {b}");
            }
        }

        #[test]
        fn d1_hk_nonincreasing_in_r2(p in any_params(), dr in 0.0f64..0.5) {
            let q = SystemParams { r2: (p.r2 + dr).min(1.0), ..p };
            prop_assert!(d1_hk(&q).value() <= d1_hk(&p).value() + 1e-12);
        }

        #[test]
        fn hk_with_no_split_is_tian(r1 in 0.0f64..=1.0, r2 in 0.0f64..=1.0, beta in 0.0f64..2.5, l in 1u32..=5) {
            let p = SystemParams::new(r1, r2, 0.0, 0.0, beta, l);
            prop_assert!((d1_hk(&p).value() - d1_tian_general(&p).value()).abs() <= 1e-12);
        }

        #[test]
        fn tian_general_never_exceeds_closed_form(r1 in 0.0f64..=1.0, r2 in 0.0f64..=1.0, beta in 0.0f64..2.5, l in 1u32..=5) {
            let p = SystemParams::new(r1, r2, 0.0, 0.0, beta, l);
            prop_assert!(d1_tian_general(&p).value() <= d1_tian(&p, l).value() + 1e-12);
            let p0 = SystemParams { r2: 0.0, ..p };
            prop_assert!((d1_tian_general(&p0).value() - d1_tian(&p0, l).value()).abs() <= 1e-12);
        }

        #[test]
        fn keep_policy_never_beats_drop_policy(p in any_params()) {
            prop_assert!(d1_hk_keep(&p).value() <= d1_hk(&p).value() + 1e-12);
        }

        #[test]
        fn dd_dominates_static_cmo(r1 in 0.0f64..=1.0, r2 in 0.0f64..=1.0, beta in 0.0f64..2.5) {
            prop_assert!(d1c_dd2(r1, r2, beta).value() >= d1c_cmo2(r1, r2, beta).value() - 1e-12);
        }

        #[test]
        fn cooperation_costs_rx2(r1 in 0.0f64..=1.0, r2 in 0.0f64..=1.0, beta in 0.0f64..2.5) {
            let p = SystemParams::new(r1, r2, 0.0, 0.0, beta, 2);
            let cmo = d2_cmo(&p, 2).value();
            prop_assert!(d2c_cmo2(r1, r2, beta).value() <= cmo + 1e-12);
            prop_assert!(d2c_tian2(r1, r2, beta).value() <= d2_tian(&p, 2).value() + 1e-12);
            prop_assert!(d2c_dd2(r1, r2, beta).value() <= cmo + 1e-12);
        }
    }
}
