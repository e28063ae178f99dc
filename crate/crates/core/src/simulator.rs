//! Finite-SNR Monte Carlo of the ARQ protocols at mutual-information level.
//!
//! Each episode draws one set of Rayleigh gains, holds them for all rounds
//! and runs the feedback state machine of the chosen scheme. Outage
//! (accumulated mutual information short of the target rate) stands in for
//! decoding error.
//!
//! Randomness is counter-based: trial `k` uses the master ChaCha8 stream
//! re-keyed to stream `k`, so results do not depend on how trials are split
//! across threads. Within a trial the same realization is reused across the
//! whole SNR grid.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::analytic::{self, SchemeId};
use crate::error::{Error, Result};
use crate::stats::{fit_line, wilson_interval, Z95};
use crate::types::{validate, SystemParams};

/// Monte Carlo run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub rho_db_grid: Vec<f64>,
    pub trials: u64,
    /// Symbols per round; only used to quantize the listening time.
    pub symbols_per_round: u32,
    pub seed: u64,
    pub scheme: SchemeId,
}

impl SimConfig {
    pub fn new(scheme: SchemeId, rho_db_grid: Vec<f64>, trials: u64, seed: u64) -> Self {
        Self { rho_db_grid, trials, symbols_per_round: 1000, seed, scheme }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        if self.symbols_per_round == 0 {
            return Err(Error::InvalidArgument("T must be >= 1".into()));
        }
        if self.rho_db_grid.is_empty() {
            return Err(Error::InvalidArgument("empty SNR grid".into()));
        }
        if self.rho_db_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("SNR grid must be strictly increasing".into()));
        }
        if let Some(bad) = self.rho_db_grid.iter().find(|&&db| !(db.is_finite() && db > 0.0)) {
            return Err(Error::Domain(format!("SNR must exceed 0 dB (got {bad})")));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Channel gains of one message: direct links, the cross link into RX1 and
/// the TX1 -> TX2 link used for cooperative listening.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    pub h11: Complex64,
    pub h21: Complex64,
    pub h22: Complex64,
    pub h_relay: Complex64,
}

impl ChannelRealization {
    /// Draw i.i.d. CN(0, 1) gains. Always consumes the same number of
    /// variates, whatever the scheme.
    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut cn = || {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        };
        Self { h11: cn(), h21: cn(), h22: cn(), h_relay: cn() }
    }

    /// Identical real gains on every link.
    pub fn uniform(h: f64) -> Self {
        let h = Complex64::new(h, 0.0);
        Self { h11: h, h21: h, h22: h, h_relay: h }
    }

    fn powers(&self) -> Gains {
        Gains {
            g11: self.h11.norm_sqr(),
            g21: self.h21.norm_sqr(),
            g22: self.h22.norm_sqr(),
            gh: self.h_relay.norm_sqr(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Gains {
    g11: f64,
    g21: f64,
    g22: f64,
    gh: f64,
}

/// Per-message result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeOutcome {
    pub err1: bool,
    pub err2: bool,
    pub rounds_used: u32,
    /// Rounds until both transmitters start new messages.
    pub zeta: u32,
}

/// What TX2 put on the air in one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tx2Action {
    /// Common and private parts.
    Both,
    CommonOnly,
    /// Its whole (unsplit) message.
    Own,
    Silent,
    /// Cooperative round 2 after RX1's NACK: listen for fraction `f` of the
    /// round, then relay TX1's message.
    ListenRelay {
        f: f64,
    },
    /// Cooperative round 2 after RX1's ACK and RX2's NACK.
    Retransmit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u32,
    pub tx2: Tx2Action,
    pub rx1_ack: bool,
    pub rx2_ack: bool,
}

/// Scheme-specific episode runner with the SNR-dependent constants computed
/// once.
#[derive(Debug, Clone)]
pub struct Simulator {
    scheme: SchemeId,
    params: SystemParams,
    rho: f64,
    rho_beta: f64,
    rho_b: f64,
    rate1: f64,
    rate2: f64,
    common2: f64,
    symbols: u32,
    static_uses_cmo: bool,
}

impl Simulator {
    pub fn new(scheme: SchemeId, params: &SystemParams, rho: f64, symbols_per_round: u32) -> Result<Self> {
        let params = validate(*params)?;
        scheme.check_rounds(params.max_rounds)?;
        if !(rho > 1.0) || !rho.is_finite() {
            return Err(Error::Domain(format!("linear SNR must exceed 1 (got {rho})")));
        }
        if symbols_per_round == 0 {
            return Err(Error::InvalidArgument("T must be >= 1".into()));
        }
        let log_rho = rho.log2();
        let static_uses_cmo =
            analytic::d1c_cmo2(params.r1, params.r2, params.beta) >= analytic::d1c_tian2(params.r1, params.beta);
        Ok(Self {
            scheme,
            params,
            rho,
            rho_beta: rho.powf(params.beta),
            rho_b: rho.powf(params.b),
            rate1: params.r1 * log_rho,
            rate2: params.r2 * log_rho,
            common2: params.t2 * log_rho,
            symbols: symbols_per_round,
            static_uses_cmo,
        })
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    /// Target rates `(R1, R2)` in bits per channel use.
    pub fn rates(&self) -> (f64, f64) {
        (self.rate1, self.rate2)
    }

    pub fn episode(&self, ch: &ChannelRealization) -> EpisodeOutcome {
        self.run(ch.powers(), None)
    }

    pub fn episode_traced(&self, ch: &ChannelRealization) -> (EpisodeOutcome, Vec<RoundRecord>) {
        let mut trace = Vec::new();
        let out = self.run(ch.powers(), Some(&mut trace));
        (out, trace)
    }

    fn run(&self, g: Gains, trace: Option<&mut Vec<RoundRecord>>) -> EpisodeOutcome {
        if self.scheme.is_coop() {
            self.run_coop(g, trace)
        } else {
            self.run_plain(g, trace)
        }
    }

    /// TX2's action in a round, given whether RX2 ACKed earlier.
    fn plain_action(&self, rx2_acked: bool) -> Tx2Action {
        match (self.scheme, rx2_acked) {
            (SchemeId::Hk, false) | (SchemeId::HkKeep, _) | (SchemeId::HkStop, false) => Tx2Action::Both,
            (SchemeId::Hk, true) => Tx2Action::CommonOnly,
            (SchemeId::Cmo, _) | (SchemeId::Tian, false) => Tx2Action::Own,
            (SchemeId::HkStop, true) | (SchemeId::Tian, true) => Tx2Action::Silent,
            _ => unreachable!("cooperative schemes use run_coop"),
        }
    }

    /// RX1 mutual information of one round: `(individual, joint)`. The joint
    /// term is `None` when RX1 never decodes TX2's signal.
    fn rx1_round(&self, action: Tx2Action, g: Gains) -> (f64, Option<f64>) {
        let direct = g.g11 * self.rho;
        let cross = g.g21 * self.rho_beta;
        let clean = (1.0 + direct).log2();
        match (self.scheme, action) {
            (SchemeId::Tian, Tx2Action::Own) => ((1.0 + direct / (1.0 + cross)).log2(), None),
            (SchemeId::Tian, _) => (clean, None),
            (SchemeId::Cmo, _) => (clean, Some((1.0 + direct + cross).log2())),
            (_, Tx2Action::Both) => {
                let private = cross / (1.0 + self.rho_b);
                let ind = (1.0 + direct / (1.0 + private)).log2();
                let joint = (1.0 + (direct + cross) / (1.0 + private)).log2();
                (ind, Some(joint))
            }
            (_, Tx2Action::CommonOnly) => (clean, Some((1.0 + direct + cross).log2())),
            (_, _) => (clean, Some(clean)),
        }
    }

    fn joint_target(&self) -> f64 {
        match self.scheme {
            SchemeId::Cmo => self.rate1 + self.rate2,
            _ => self.rate1 + self.common2,
        }
    }

    fn rx2_decodes(&self, rounds: u32, g: Gains) -> bool {
        let n = f64::from(rounds);
        let whole = n * (1.0 + g.g22 * self.rho).log2();
        if whole < self.rate2 {
            return false;
        }
        match self.scheme {
            SchemeId::Hk | SchemeId::HkKeep | SchemeId::HkStop => {
                let private = n * (1.0 + g.g22 * self.rho / (1.0 + self.rho_b)).log2();
                whole >= self.common2 && private >= self.rate2 - self.common2
            }
            _ => true,
        }
    }

    fn run_plain(&self, g: Gains, mut trace: Option<&mut Vec<RoundRecord>>) -> EpisodeOutcome {
        let l = self.params.max_rounds;
        let (mut acc_ind, mut acc_joint) = (0.0, 0.0);
        let (mut ack1, mut ack2) = (false, false);
        let target = self.joint_target();
        for round in 1..=l {
            let action = self.plain_action(ack2);
            let (ind, joint) = self.rx1_round(action, g);
            acc_ind += ind;
            acc_joint += joint.unwrap_or(0.0);
            if !ack1 {
                ack1 = acc_ind >= self.rate1 && (joint.is_none() || acc_joint >= target);
            }
            if !ack2 {
                ack2 = self.rx2_decodes(round, g);
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push(RoundRecord { round, tx2: action, rx1_ack: ack1, rx2_ack: ack2 });
            }
            if ack1 && ack2 {
                return EpisodeOutcome { err1: false, err2: false, rounds_used: round, zeta: round };
            }
        }
        EpisodeOutcome { err1: !ack1, err2: !ack2, rounds_used: l, zeta: l }
    }

    /// Listening fraction `T'/T`.
    fn listening_fraction(&self, gh: f64) -> f64 {
        if self.rate1 <= 0.0 {
            return 0.0;
        }
        let t = f64::from(self.symbols);
        let cap = (1.0 + gh * self.rho).log2();
        if cap <= 0.0 {
            return 1.0;
        }
        (t * self.rate1 / cap).ceil().min(t) / t
    }

    fn run_coop(&self, g: Gains, mut trace: Option<&mut Vec<RoundRecord>>) -> EpisodeOutcome {
        let direct = g.g11 * self.rho;
        let cross = g.g21 * self.rho_beta;
        let snr = (1.0 + direct).log2();
        let joint = (1.0 + direct + cross).log2();
        let sinr = (1.0 + direct / (1.0 + cross)).log2();
        let (r1, r12) = (self.rate1, self.rate1 + self.rate2);

        let cmo1 = snr >= r1 && joint >= r12;
        let tian1 = sinr >= r1;
        let use_cmo = match self.scheme {
            SchemeId::CoopCmo => true,
            SchemeId::CoopTian => false,
            _ => self.static_uses_cmo,
        };
        let ack1 = match self.scheme {
            SchemeId::CoopDd => cmo1 || tian1,
            _ if use_cmo => cmo1,
            _ => tian1,
        };
        let ack2 = self.rx2_decodes(1, g);
        if let Some(t) = trace.as_deref_mut() {
            t.push(RoundRecord { round: 1, tx2: Tx2Action::Own, rx1_ack: ack1, rx2_ack: ack2 });
        }
        if ack1 && ack2 {
            return EpisodeOutcome { err1: false, err2: false, rounds_used: 1, zeta: 1 };
        }
        if ack1 {
            let ack2 = self.rx2_decodes(2, g);
            if let Some(t) = trace {
                t.push(RoundRecord { round: 2, tx2: Tx2Action::Retransmit, rx1_ack: true, rx2_ack: ack2 });
            }
            return EpisodeOutcome { err1: false, err2: !ack2, rounds_used: 2, zeta: 2 };
        }

        // RX1 NACKed: TX2 listens, then relays TX1's message for the rest of
        // the round. Its own message gets no second round.
        let f = self.listening_fraction(g.gh);
        let round2 = f * snr + (1.0 - f) * joint;
        let o1 = snr + round2 < r1;
        let o2 = joint + round2 < r12;
        let o3 = sinr + round2 < r1;
        let ok1 = match self.scheme {
            SchemeId::CoopDd => !o3 || (!o1 && !o2),
            _ if use_cmo => !o1 && !o2,
            _ => !o3,
        };
        if let Some(t) = trace {
            t.push(RoundRecord { round: 2, tx2: Tx2Action::ListenRelay { f }, rx1_ack: ok1, rx2_ack: ack2 });
        }
        EpisodeOutcome { err1: !ok1, err2: !ack2, rounds_used: 2, zeta: 2 }
    }
}

/// Run one episode of `cfg.scheme` at linear SNR `rho`.
pub fn run_episode(
    params: &SystemParams,
    rho: f64,
    realization: &ChannelRealization,
    cfg: &SimConfig,
) -> Result<EpisodeOutcome> {
    Ok(Simulator::new(cfg.scheme, params, rho, cfg.symbols_per_round)?.episode(realization))
}

/// Deterministic generator for trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    err1: u64,
    err2: u64,
    zeta: u64,
}

fn add(mut a: Vec<Counts>, b: Vec<Counts>) -> Vec<Counts> {
    for (x, y) in a.iter_mut().zip(b) {
        x.err1 += y.err1;
        x.err2 += y.err2;
        x.zeta += y.zeta;
    }
    a
}

/// Raw tallies over the grid, one entry per SNR point.
fn tally(params: &SystemParams, cfg: &SimConfig) -> Result<Vec<Counts>> {
    cfg.validate()?;
    let sims = cfg
        .rho_db_grid
        .iter()
        .map(|&db| Simulator::new(cfg.scheme, params, db_to_linear(db), cfg.symbols_per_round))
        .collect::<Result<Vec<_>>>()?;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let zero = vec![Counts::default(); sims.len()];
    let counts = (0..cfg.trials)
        .into_par_iter()
        .fold(
            || zero.clone(),
            |mut acc, k| {
                let mut rng = base.clone();
                rng.set_stream(k);
                let ch = ChannelRealization::draw(&mut rng);
                for (c, sim) in acc.iter_mut().zip(&sims) {
                    let o = sim.episode(&ch);
                    c.err1 += u64::from(o.err1);
                    c.err2 += u64::from(o.err2);
                    c.zeta += u64::from(o.zeta);
                }
                acc
            },
        )
        .reduce(|| zero.clone(), add);
    Ok(counts)
}

/// Empirical outage at one SNR point with 95% Wilson intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutagePoint {
    pub rho_db: f64,
    pub trials: u64,
    pub p_out1: f64,
    pub ci1: (f64, f64),
    pub p_out2: f64,
    pub ci2: (f64, f64),
}

impl OutagePoint {
    fn from_counts(rho_db: f64, trials: u64, c: &Counts) -> Result<Self> {
        let n = trials as f64;
        Ok(Self {
            rho_db,
            trials,
            p_out1: c.err1 as f64 / n,
            ci1: wilson_interval(c.err1, trials, Z95)?,
            p_out2: c.err2 as f64 / n,
            ci2: wilson_interval(c.err2, trials, Z95)?,
        })
    }
}

/// Outage estimates over `cfg.rho_db_grid`, sharing each trial's channel
/// realization across all grid points.
pub fn estimate_outage_grid(params: &SystemParams, cfg: &SimConfig) -> Result<Vec<OutagePoint>> {
    let counts = tally(params, cfg)?;
    cfg.rho_db_grid.iter().zip(&counts).map(|(&db, c)| OutagePoint::from_counts(db, cfg.trials, c)).collect()
}

/// Outage probabilities of both users at one SNR (in dB).
pub fn estimate_outage(
    scheme: SchemeId,
    params: &SystemParams,
    rho_db: f64,
    trials: u64,
    seed: u64,
) -> Result<OutagePoint> {
    let cfg = SimConfig::new(scheme, vec![rho_db], trials, seed);
    Ok(estimate_outage_grid(params, &cfg)?.remove(0))
}

/// One usable regression point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopePoint {
    pub rho_db: f64,
    pub p_out: f64,
    pub ci: (f64, f64),
}

/// Diversity estimated as the slope of `-log10 p_out` against `log10 rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversityEstimate {
    pub slope: f64,
    pub stderr: Option<f64>,
    pub points: Vec<SlopePoint>,
    /// SNR points dropped because no outage was observed.
    pub dropped_db: Vec<f64>,
}

impl DiversityEstimate {
    /// Fit over `(rho_db, p_out, ci)` triples, skipping zero-outage points.
    pub fn fit(points: &[SlopePoint]) -> Result<Self> {
        let (used, dropped): (Vec<SlopePoint>, Vec<SlopePoint>) = points.iter().partition(|p| p.p_out > 0.0);
        if used.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "fewer than 2 usable points ({} of {} have nonzero outage)",
                used.len(),
                points.len()
            )));
        }
        let xs: Vec<f64> = used.iter().map(|p| p.rho_db / 10.0).collect();
        let ys: Vec<f64> = used.iter().map(|p| -p.p_out.log10()).collect();
        let line = fit_line(&xs, &ys)?;
        Ok(Self {
            slope: line.slope,
            stderr: line.slope_stderr,
            points: used,
            dropped_db: dropped.iter().map(|p| p.rho_db).collect(),
        })
    }
}

/// Per-user slope points from a grid of outage estimates.
pub fn slope_points(grid: &[OutagePoint]) -> (Vec<SlopePoint>, Vec<SlopePoint>) {
    grid.iter()
        .map(|p| {
            (
                SlopePoint { rho_db: p.rho_db, p_out: p.p_out1, ci: p.ci1 },
                SlopePoint { rho_db: p.rho_db, p_out: p.p_out2, ci: p.ci2 },
            )
        })
        .unzip()
}

/// Diversity estimates of RX1 and RX2 over the configured grid.
pub fn estimate_diversity(params: &SystemParams, cfg: &SimConfig) -> Result<(DiversityEstimate, DiversityEstimate)> {
    let grid = estimate_outage_grid(params, cfg)?;
    let (a, b) = slope_points(&grid);
    Ok((DiversityEstimate::fit(&a)?, DiversityEstimate::fit(&b)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputEstimate {
    pub rho_db: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub ratio1: f64,
    pub ratio2: f64,
    pub mean_zeta: f64,
}

/// Long-run throughput `eta_i = R_i / E[zeta]` at one SNR (in dB).
pub fn estimate_throughput(
    scheme: SchemeId,
    params: &SystemParams,
    rho_db: f64,
    trials: u64,
    seed: u64,
) -> Result<ThroughputEstimate> {
    let cfg = SimConfig::new(scheme, vec![rho_db], trials, seed);
    let c = tally(params, &cfg)?[0];
    let mean_zeta = c.zeta as f64 / trials as f64;
    let sim = Simulator::new(scheme, params, db_to_linear(rho_db), cfg.symbols_per_round)?;
    let (r1, r2) = sim.rates();
    Ok(ThroughputEstimate {
        rho_db,
        eta1: r1 / mean_zeta,
        eta2: r2 / mean_zeta,
        ratio1: 1.0 / mean_zeta,
        ratio2: 1.0 / mean_zeta,
        mean_zeta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sp(r1: f64, r2: f64, t2: f64, b: f64, beta: f64, l: u32) -> SystemParams {
        SystemParams::new(r1, r2, t2, b, beta, l)
    }

    fn params_for(s: SchemeId, l: u32) -> SystemParams {
        sp(0.4, 0.5, 0.2, 0.1, 0.9, if s.is_coop() { 2 } else { l })
    }

    #[test]
    fn strong_channels_never_fail() {
        // Huge direct and relay gains; a huge cross gain would also scale the
        // interference that TIAN and the HK private part treat as noise.
        let ch = ChannelRealization { h21: Complex64::new(1.0, 0.0), ..ChannelRealization::uniform(1e6) };
        for s in SchemeId::ALL {
            let sim = Simulator::new(s, &params_for(s, 3), 1e3, 1000).unwrap();
            let o = sim.episode(&ch);
            assert_eq!(o, EpisodeOutcome { err1: false, err2: false, rounds_used: 1, zeta: 1 }, "{s}");
        }
    }

    #[test]
    fn dead_direct_link_always_fails_rx1() {
        // Cooperative schemes are excluded: TX2 can relay TX1's message
        // over the cross link.
        let mut rng = trial_rng(3, 0);
        for s in SchemeId::ALL.into_iter().filter(|s| !s.is_coop()) {
            let sim = Simulator::new(s, &params_for(s, 2), 1e3, 1000).unwrap();
            for _ in 0..200 {
                let mut ch = ChannelRealization::draw(&mut rng);
                ch.h11 = Complex64::new(0.0, 0.0);
                assert!(sim.episode(&ch).err1, "{s}");
            }
        }
    }

    #[test]
    fn constructor_errors() {
        let p = sp(0.3, 0.3, 0.0, 0.0, 1.0, 3);
        assert!(Simulator::new(SchemeId::CoopDd, &p, 100.0, 1000).is_err());
        assert!(Simulator::new(SchemeId::Cmo, &p, 1.0, 1000).is_err());
        assert!(Simulator::new(SchemeId::Cmo, &p, 100.0, 0).is_err());
        assert!(estimate_outage(SchemeId::Cmo, &p, 20.0, 0, 1).is_err());
        let cfg = SimConfig::new(SchemeId::Cmo, vec![20.0, 10.0], 10, 1);
        assert!(estimate_outage_grid(&p, &cfg).is_err());
    }

    #[test]
    fn single_trial_gives_zero_or_one() {
        let p = sp(0.6, 0.6, 0.0, 0.0, 1.0, 1);
        let o = estimate_outage(SchemeId::Cmo, &p, 10.0, 1, 9).unwrap();
        assert!(o.p_out1 == 0.0 || o.p_out1 == 1.0);
        assert!(o.p_out2 == 0.0 || o.p_out2 == 1.0);
    }

    #[test]
    fn zero_rates_never_outage() {
        let p = sp(0.0, 0.0, 0.0, 0.0, 0.5, 1);
        let o = estimate_outage(SchemeId::Cmo, &p, 20.0, 100_000, 1).unwrap();
        assert_eq!((o.p_out1, o.p_out2), (0.0, 0.0));
        let cfg = SimConfig::new(SchemeId::Cmo, vec![10.0, 20.0, 30.0], 10_000, 1);
        let err = estimate_diversity(&p, &cfg).unwrap_err().to_string();
        assert!(err.contains("fewer than 2 usable points"), "{err}");
    }

    #[test]
    fn single_round_throughput_is_full_rate() {
        let p = sp(0.8, 0.9, 0.3, 0.1, 1.0, 1);
        let t = estimate_throughput(SchemeId::Hk, &p, 10.0, 5_000, 2).unwrap();
        assert_eq!(t.mean_zeta, 1.0);
        assert_eq!((t.ratio1, t.ratio2), (1.0, 1.0));
    }

    #[test]
    fn high_rates_at_low_snr_cost_throughput() {
        let p = sp(0.9, 0.9, 0.3, 0.1, 1.0, 2);
        let t = estimate_throughput(SchemeId::Hk, &p, 10.0, 20_000, 2).unwrap();
        assert!(t.ratio1 < 0.8, "{t:?}");
    }

    #[test]
    fn cmo_keeps_sending_after_ack_and_tian_stops() {
        // RX2 decodes in round 1 (strong h22) while RX1 needs two rounds.
        let p = sp(0.7, 0.1, 0.0, 0.0, 0.5, 2);
        let rho = 1e4;
        let ch = ChannelRealization {
            h11: Complex64::new(0.1, 0.0),
            h21: Complex64::new(0.3, 0.0),
            h22: Complex64::new(3.0, 0.0),
            h_relay: Complex64::new(1.0, 0.0),
        };
        let (_, trace) = Simulator::new(SchemeId::Cmo, &p, rho, 1000).unwrap().episode_traced(&ch);
        assert!(trace[0].rx2_ack);
        assert_eq!(trace.len(), 2);
        assert_eq!(trace[1].tx2, Tx2Action::Own);

        let (_, trace) = Simulator::new(SchemeId::Tian, &p, rho, 1000).unwrap().episode_traced(&ch);
        assert!(trace[0].rx2_ack);
        assert_eq!(trace[1].tx2, Tx2Action::Silent);

        let (_, trace) =
            Simulator::new(SchemeId::Hk, &sp(0.7, 0.1, 0.05, 0.1, 0.5, 2), rho, 1000).unwrap().episode_traced(&ch);
        assert_eq!(trace[0].tx2, Tx2Action::Both);
        assert_eq!(trace[1].tx2, Tx2Action::CommonOnly);
    }

    #[test]
    fn listening_fraction_edges() {
        let p = sp(0.5, 0.5, 0.0, 0.0, 1.0, 2);
        let sim = Simulator::new(SchemeId::CoopCmo, &p, 1e3, 1000).unwrap();
        assert_eq!(sim.listening_fraction(0.0), 1.0);
        // ceil(1000 * 4.98 / 9.97) = 500 symbols
        assert_eq!(sim.listening_fraction(1.0), 0.5);
        assert_eq!(sim.listening_fraction(1e-3), 1.0);
        let zero = Simulator::new(SchemeId::CoopCmo, &sp(0.0, 0.5, 0.0, 0.0, 1.0, 2), 1e3, 1000).unwrap();
        assert_eq!(zero.listening_fraction(1.0), 0.0);
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let p = sp(0.3, 0.3, 0.1, 0.1, 0.8, 2);
        let cfg = SimConfig::new(SchemeId::Hk, vec![10.0, 20.0], 20_000, 42);
        let a = estimate_outage_grid(&p, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| estimate_outage_grid(&p, &cfg).unwrap());
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn episode_invariants(seed in any::<u64>(), r1 in 0.0f64..=1.0, r2 in 0.0f64..=1.0,
                              t2f in 0.0f64..=1.0, b in 0.0f64..0.6, beta in 0.0f64..2.0,
                              l in 1u32..=4, db in 1.0f64..40.0) {
            let mut rng = trial_rng(seed, 0);
            let ch = ChannelRealization::draw(&mut rng);
            for s in SchemeId::ALL {
                let l = if s.is_coop() { 2 } else { l };
                let p = sp(r1, r2, r2 * t2f, b, beta, l);
                let sim = Simulator::new(s, &p, db_to_linear(db), 1000).unwrap();
                let (o, trace) = sim.episode_traced(&ch);
                prop_assert_eq!(o, sim.episode(&ch));
                prop_assert!(1 <= o.zeta && o.zeta <= l && o.rounds_used <= l);
                prop_assert_eq!(trace.len() as u32, o.rounds_used);
                if o.zeta < l && !s.is_coop() {
                    prop_assert!(!o.err1 && !o.err2);
                }
                if s.is_coop() && !trace[0].rx1_ack && trace.len() == 2 {
                    // no own-message transmission after RX1's round-1 NACK
                    let relays = matches!(trace[1].tx2, Tx2Action::ListenRelay { .. });
                    prop_assert!(relays);
                }
            }
        }
    }
}
