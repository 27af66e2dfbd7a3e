//! Monte Carlo execution of the prepare-and-measure protocol.
//!
//! Every round `k` draws from its own random substream, so a session split
//! into contiguous ranges and merged in order is bit-identical to a serial
//! run.

use alloc::vec::Vec;
use core::ops::Range;

#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::adversary::{bob_channel, FlipChannel};
use crate::channel::KrausChannel;
use crate::classical::certify;
use crate::error::{check_range, Error, Result};
use crate::photonic::{correction_signs, report_table, NoClick, PhotonicParams};
use crate::quantum::Sign;
use crate::rng::{bernoulli, categorical, substream, ChaCha8Rng};
use crate::tomography::{exact_stats, fidelity_to_identity, ConditionalStats, CountTable, MeasurementFrame, ProbTable};

/// What sits between Alice's preparation and Bob's measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelSpec {
    Ideal,
    /// Flips the state with probability `Q`.
    Flip(f64),
    /// The cloning attack applied with probability `p'`.
    Uqcm(f64),
    Depolarizing(f64),
    /// Entangled photons with lossy detectors; Alice's outcome prepares.
    Photonic(PhotonicParams),
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelSpec::Ideal => Ok(()),
            ChannelSpec::Flip(q) => check_range("flip probability", q, 0.0, 0.5, "[0, 1/2]").map(drop),
            ChannelSpec::Uqcm(p) => check_range("attack probability", p, 0.0, 1.0, "[0, 1]").map(drop),
            ChannelSpec::Depolarizing(q) => check_range("depolarizing probability", q, 0.0, 1.0, "[0, 1]").map(drop),
            ChannelSpec::Photonic(p) => p.validate(),
        }
    }
}

/// How settings are drawn and which rounds feed tomography.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SettingsMode {
    /// Independent uniform settings; a fraction `sacrifice` of the `(3, 3)`
    /// rounds is revealed for tomography.
    Uniform { sacrifice: f64 },
    /// A public coin makes each round a test round with probability `γ`,
    /// with uniform settings; otherwise both sides use setting 3.
    Biased { gamma: f64 },
}

impl Default for SettingsMode {
    fn default() -> Self {
        SettingsMode::Uniform { sacrifice: 0.1 }
    }
}

impl SettingsMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SettingsMode::Uniform { sacrifice } => check_range("sacrifice", sacrifice, 0.0, 1.0, "[0, 1]").map(drop),
            SettingsMode::Biased { gamma } => check_range("gamma", gamma, 0.0, 1.0, "[0, 1]").map(drop),
        }
    }

    /// Marginal probabilities of settings 1, 2, 3 on either side.
    pub fn setting_weights(&self) -> [f64; 3] {
        match *self {
            SettingsMode::Uniform { .. } => [1.0 / 3.0; 3],
            SettingsMode::Biased { gamma } => [gamma / 3.0, gamma / 3.0, 1.0 - 2.0 * gamma / 3.0],
        }
    }

    /// Expected fraction of test rounds.
    pub fn test_fraction(&self) -> f64 {
        match *self {
            SettingsMode::Uniform { sacrifice } => 1.0 - (1.0 - sacrifice) / 9.0,
            SettingsMode::Biased { gamma } => gamma,
        }
    }
}

/// Replaces the channel from round `at` on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSwitch {
    pub at: u64,
    pub channel: ChannelSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    /// Total rounds `N`.
    pub rounds: u64,
    pub settings: SettingsMode,
    pub seed: u64,
    pub channel: ChannelSpec,
    pub switch: Option<ChannelSwitch>,
    /// Alice corrects her record for the anti-correlation of the singlet.
    pub correction: bool,
    pub frame: MeasurementFrame,
    /// Run the block homogeneity check with this many blocks.
    pub blocks: Option<usize>,
}

impl SessionConfig {
    pub fn new(rounds: u64, channel: ChannelSpec, seed: u64) -> Self {
        Self {
            rounds,
            settings: SettingsMode::default(),
            seed,
            channel,
            switch: None,
            correction: true,
            frame: MeasurementFrame::rotated(),
            blocks: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::OutOfRange {
                name: "rounds",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        self.settings.validate()?;
        self.channel.validate()?;
        if let Some(s) = &self.switch {
            s.channel.validate()?;
        }
        if let Some(m) = self.blocks {
            if m < 2 {
                return Err(Error::OutOfRange {
                    name: "blocks",
                    value: m as f64,
                    range: "[2, inf)",
                });
            }
        }
        Ok(())
    }

    /// `n = floor(N (1 - γ))` with the mode's expected test fraction.
    pub fn nominal_key_rounds(&self) -> u64 {
        (self.rounds as f64 * (1.0 - self.settings.test_fraction())).floor() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoundKind {
    Test,
    Key,
    Discarded,
}

impl RoundKind {
    pub fn name(self) -> &'static str {
        match self {
            RoundKind::Test => "test",
            RoundKind::Key => "key",
            RoundKind::Discarded => "discarded",
        }
    }
}

/// One round with 1-based settings. Discarded rounds carry no outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundRecord {
    pub k: u64,
    pub i: u8,
    pub a: Option<Sign>,
    pub j: u8,
    pub b: Option<Sign>,
    pub kind: RoundKind,
}

/// A channel ready for sampling.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
enum Sampler {
    /// `P(b | prepared a_i, j)`
    Prepared(ProbTable),
    Photonic {
        reports: [[[[f64; 3]; 3]; 3]; 3],
        signs: [Sign; 3],
        no_click: NoClick,
    },
}

impl Sampler {
    fn new(spec: &ChannelSpec, frame: &MeasurementFrame) -> Result<Self> {
        let stats = match *spec {
            ChannelSpec::Ideal => exact_stats(&KrausChannel::identity(2), frame)?,
            ChannelSpec::Flip(q) => exact_stats(&FlipChannel::new(q)?, frame)?,
            ChannelSpec::Uqcm(p) => exact_stats(&bob_channel(p / 6.0)?, frame)?,
            ChannelSpec::Depolarizing(q) => exact_stats(&KrausChannel::depolarizing(q)?, frame)?,
            ChannelSpec::Photonic(p) => {
                return Ok(Sampler::Photonic {
                    reports: report_table(&p, frame)?,
                    signs: correction_signs(frame),
                    no_click: p.no_click,
                })
            }
        };
        Ok(Sampler::Prepared(*stats.table()))
    }
}

/// Everything needed to simulate rounds, built once per session.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSession {
    config: SessionConfig,
    before: Sampler,
    after: Option<(u64, Sampler)>,
}

impl PreparedSession {
    pub fn new(config: &SessionConfig) -> Result<Self> {
        config.validate()?;
        let after = match &config.switch {
            Some(s) => Some((s.at, Sampler::new(&s.channel, &config.frame)?)),
            None => None,
        };
        Ok(Self {
            config: config.clone(),
            before: Sampler::new(&config.channel, &config.frame)?,
            after,
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    fn sampler(&self, k: u64) -> &Sampler {
        match &self.after {
            Some((at, s)) if k >= *at => s,
            _ => &self.before,
        }
    }

    /// Simulates round `k`.
    pub fn round(&self, k: u64) -> RoundRecord {
        let mut rng = substream(self.config.seed, k);
        let test_coin = match self.config.settings {
            SettingsMode::Uniform { .. } => None,
            SettingsMode::Biased { gamma } => Some(bernoulli(&mut rng, gamma)),
        };
        let setting = |rng: &mut ChaCha8Rng| match test_coin {
            Some(false) => 2,
            _ => categorical(rng, &[1.0; 3]),
        };
        let i = setting(&mut rng);
        let (a, j, b) = match self.sampler(k) {
            Sampler::Prepared(table) => {
                // Alice's half of the singlet; Bob's half is left in the opposite eigenstate
                let measured = if bernoulli(&mut rng, 0.5) {
                    Sign::Plus
                } else {
                    Sign::Minus
                };
                let prepared = measured.flip();
                let j = setting(&mut rng);
                let p_plus = table[i][prepared.index()][j][0];
                let b = if bernoulli(&mut rng, p_plus) {
                    Sign::Plus
                } else {
                    Sign::Minus
                };
                let a = if self.config.correction { prepared } else { measured };
                (Some(a), j, Some(b))
            }
            Sampler::Photonic {
                reports,
                signs,
                no_click,
            } => {
                let j = setting(&mut rng);
                let cell = &reports[i][j];
                let flat: [f64; 9] = core::array::from_fn(|n| cell[n / 3][n % 3]);
                let n = categorical(&mut rng, &flat);
                let (ra, rb) = (n / 3, n % 3);
                let a = (ra < 2).then(|| {
                    let raw = Sign::from_index(ra);
                    if self.config.correction {
                        signs[i].times(raw)
                    } else {
                        raw
                    }
                });
                let b = match (rb, no_click) {
                    (0 | 1, _) => Some(Sign::from_index(rb)),
                    (_, NoClick::Minus) => Some(Sign::Minus),
                    (_, NoClick::Random) => Some(if bernoulli(&mut rng, 0.5) {
                        Sign::Plus
                    } else {
                        Sign::Minus
                    }),
                    (_, NoClick::Discard) => None,
                };
                (a, j, b)
            }
        };
        let kind = match (self.config.settings, test_coin) {
            _ if a.is_none() || b.is_none() => RoundKind::Discarded,
            (_, Some(true)) => RoundKind::Test,
            (_, Some(false)) => RoundKind::Key,
            (SettingsMode::Uniform { sacrifice }, None) if i == 2 && j == 2 && !bernoulli(&mut rng, sacrifice) => {
                RoundKind::Key
            }
            _ => RoundKind::Test,
        };
        RoundRecord {
            k,
            i: i as u8 + 1,
            a,
            j: j as u8 + 1,
            b,
            kind,
        }
    }

    /// Simulates a contiguous range of rounds.
    pub fn simulate(&self, range: Range<u64>) -> Partial {
        let mut part = Partial::default();
        for k in range {
            part.push(self.round(k));
        }
        part
    }
}

/// Accumulated rounds of a contiguous range.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Partial {
    pub counts: CountTable,
    /// Rounds per `(i, j)` setting pair, all kinds.
    pub settings: [[u64; 3]; 3],
    pub records: Vec<RoundRecord>,
}

impl Partial {
    fn push(&mut self, r: RoundRecord) {
        let (i, j) = (r.i as usize - 1, r.j as usize - 1);
        self.settings[i][j] += 1;
        if let (RoundKind::Test, Some(a), Some(b)) = (r.kind, r.a, r.b) {
            self.counts[i][a.index()][j][b.index()] += 1;
        }
        self.records.push(r);
    }

    /// Appends the range that follows `self`.
    pub fn merge(mut self, next: Partial) -> Partial {
        for (x, y) in self
            .counts
            .iter_mut()
            .flatten()
            .flatten()
            .flatten()
            .zip(next.counts.iter().flatten().flatten().flatten())
        {
            *x += y;
        }
        for (x, y) in self.settings.iter_mut().flatten().zip(next.settings.iter().flatten()) {
            *x += y;
        }
        self.records.extend(next.records);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Keys {
    pub alice: Vec<u8>,
    pub bob: Vec<u8>,
}

impl Keys {
    pub fn len(&self) -> usize {
        self.alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice.is_empty()
    }

    /// Fraction of differing bits; 0 for empty keys.
    pub fn qber(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let diff = self.alice.iter().zip(&self.bob).filter(|(a, b)| a != b).count();
        diff as f64 / self.len() as f64
    }
}

/// Raw key bits of the key rounds, `+1 -> 0`, `-1 -> 1`.
pub fn extract_keys(records: &[RoundRecord]) -> Keys {
    let (alice, bob) = records
        .iter()
        .filter(|r| r.kind == RoundKind::Key)
        .filter_map(|r| Some((r.a?.bit(), r.b?.bit())))
        .unzip();
    Keys { alice, bob }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    /// Test-round statistics.
    pub stats: ConditionalStats,
    pub f_expt: f64,
    pub f_gc: f64,
    pub aborted: bool,
    pub keys: Keys,
    pub q_emp: f64,
    pub settings: [[u64; 3]; 3],
    pub records: Vec<RoundRecord>,
    pub block_report: Option<BlockReport>,
}

impl SessionResult {
    /// The raw keys, refused when the session aborted.
    pub fn final_keys(&self) -> Result<&Keys> {
        if self.aborted {
            Err(Error::Aborted)
        } else {
            Ok(&self.keys)
        }
    }

    pub fn count(&self, kind: RoundKind) -> usize {
        self.records.iter().filter(|r| r.kind == kind).count()
    }
}

/// Turns the merged rounds of a whole session into its result.
pub fn finish(session: &PreparedSession, part: Partial, f_gc: f64) -> Result<SessionResult> {
    let config = session.config();
    let stats = ConditionalStats::from_counts(part.counts)?;
    let f_expt = fidelity_to_identity(&stats, &config.frame)?;
    let keys = extract_keys(&part.records);
    let block_report = match config.blocks {
        Some(m) => Some(iid_block_check(&part.records, m, &config.frame)?),
        None => None,
    };
    Ok(SessionResult {
        stats,
        f_expt,
        f_gc,
        aborted: !certify(f_expt, f_gc),
        q_emp: keys.qber(),
        keys,
        settings: part.settings,
        records: part.records,
        block_report,
    })
}

/// Serial session; `f_gc` is the classical bound of the frame.
pub fn run_session(config: &SessionConfig, f_gc: f64) -> Result<SessionResult> {
    let session = PreparedSession::new(config)?;
    let part = session.simulate(0..config.rounds);
    finish(&session, part, f_gc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockStat {
    /// Record index range of the block.
    pub start: usize,
    pub end: usize,
    pub f_expt: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub blocks: Vec<BlockStat>,
    /// Largest pairwise `|ΔF|`.
    pub statistic: f64,
    /// Largest pairwise `|ΔF|` in pooled standard errors.
    pub max_z: f64,
    pub flagged: bool,
}

/// Pairs differing by more than this many pooled standard errors are flagged.
pub const BLOCK_Z_THRESHOLD: f64 = 5.0;

/// `∂F/∂P(+|a_i, j)` per row. The reconstruction is linear, so these are
/// exact differences.
fn fidelity_gradient(frame: &MeasurementFrame) -> Result<[[[f64; 3]; 2]; 3]> {
    let half: ProbTable = [[[[0.5; 2]; 3]; 2]; 3];
    let mut grad = [[[0.0; 3]; 2]; 3];
    for i in 0..3 {
        for a in 0..2 {
            for j in 0..3 {
                let mut hi = half;
                hi[i][a][j] = [1.0, 0.0];
                let mut lo = half;
                lo[i][a][j] = [0.0, 1.0];
                grad[i][a][j] = fidelity_to_identity(&ConditionalStats::from_probabilities(hi)?, frame)?
                    - fidelity_to_identity(&ConditionalStats::from_probabilities(lo)?, frame)?;
            }
        }
    }
    Ok(grad)
}

/// Splits the rounds into `m` consecutive blocks with lengths proportional
/// to `1, 2, …, m` and compares their tomographic fidelities.
pub fn iid_block_check(records: &[RoundRecord], m: usize, frame: &MeasurementFrame) -> Result<BlockReport> {
    if m < 2 {
        return Err(Error::OutOfRange {
            name: "blocks",
            value: m as f64,
            range: "[2, inf)",
        });
    }
    let grad = fidelity_gradient(frame)?;
    let total = records.len();
    let denom = m * (m + 1) / 2;
    let mut blocks = Vec::with_capacity(m);
    let mut start = 0;
    let mut cum = 0;
    for b in 1..=m {
        cum += b;
        let end = total * cum / denom;
        let mut counts: CountTable = Default::default();
        for r in &records[start..end] {
            if let (RoundKind::Test, Some(a), Some(bb)) = (r.kind, r.a, r.b) {
                counts[r.i as usize - 1][a.index()][r.j as usize - 1][bb.index()] += 1;
            }
        }
        let stats = ConditionalStats::from_counts(counts)
            .map_err(|_| Error::InsufficientData("a block has a setting row without test rounds"))?;
        let f_expt = fidelity_to_identity(&stats, frame)?;
        let mut var = 0.0;
        for i in 0..3 {
            for a in 0..2 {
                for j in 0..3 {
                    let [p, q] = counts[i][a][j];
                    let n = (p + q) as f64;
                    let ph = p as f64 / n;
                    var += grad[i][a][j] * grad[i][a][j] * ph * (1.0 - ph) / n;
                }
            }
        }
        blocks.push(BlockStat {
            start,
            end,
            f_expt,
            std_error: var.sqrt(),
        });
        start = end;
    }
    let mut statistic: f64 = 0.0;
    let mut max_z: f64 = 0.0;
    for (x, bx) in blocks.iter().enumerate() {
        for by in &blocks[x + 1..] {
            let d = (bx.f_expt - by.f_expt).abs();
            let se = (bx.std_error * bx.std_error + by.std_error * by.std_error).sqrt();
            let z = if se > 0.0 {
                d / se
            } else if d > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            statistic = statistic.max(d);
            max_z = max_z.max(z);
        }
    }
    Ok(BlockReport {
        blocks,
        statistic,
        max_z,
        flagged: max_z > BLOCK_Z_THRESHOLD,
    })
}
