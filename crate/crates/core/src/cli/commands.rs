use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::attacks::{
    delta_coefficients, entangle_measure_attack, entangled_joint_distribution, fake_bm_attack, unitary_attack,
    AttackOutcome, EBasis, FakeBmConfig, JointDistribution, PauliAttackConfig,
};
use crate::channel::{detection_probability, share_channel, sharing_statistics, Eavesdropper, SharingConfig, SharingReport, SharingStatistics};
use crate::ot::{learn_rate, ot_bit, repeated_ot_probability, repeated_ot_rate, BitEncoding};
use crate::rng::trial_seed;
use crate::statevec::Qubit;
use crate::stats::Proportion;
use crate::teleport::{run_analytic, run_batch, run_sampled, success_rate, BellOutcome, ChannelParams, Transcript};

use super::input::{parse_coefficients, parse_grid, parse_state, RENORM_WARN};
use super::{
    AttackCommand, ChannelArgs, CliError, EavesdropperName, EncodingName, Format, OtArgs, OtMode, Report, SweepArgs,
    TeleportArgs, SIGMA_LIMIT,
};

fn channel_params(b2: f64) -> Result<ChannelParams, CliError> {
    ChannelParams::from_b2(b2).map_err(|e| CliError::Usage(format!("--b2: {e}")))
}

fn input_state(s: &str) -> Result<Qubit, CliError> {
    let (q, norm) = parse_state(s)?;
    if (norm - 1.0).abs() > RENORM_WARN {
        eprintln!("warning: --state had norm {norm}; renormalized to 1");
    }
    Ok(q)
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Encode(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Encode(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Encode(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Encode(e.to_string()))
}

fn json_only(format: Format, command: &str) -> Result<(), CliError> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Usage(format!("`{command}` has no CSV output; use --format json"))),
    }
}

/// `(z, within)` for an empirical rate against `p`; `z` is `None` when `p` is 0 or 1.
fn agreement(rate: &Proportion, p: f64) -> (Option<f64>, bool) {
    let sigma = rate.sigma_at(p);
    let z = (sigma > 0.0).then(|| (rate.rate() - p) / sigma);
    (z, rate.within_sigma(p, SIGMA_LIMIT))
}

#[derive(Serialize)]
struct TranscriptRecord {
    seed: u64,
    b2: f64,
    input: Qubit,
    bm_outcome: BellOutcome,
    m_outcome: u8,
    success: bool,
    bob_state: Option<Qubit>,
    fidelity: f64,
}

impl TranscriptRecord {
    fn new(t: &Transcript, b2: f64) -> Self {
        Self {
            seed: t.seed,
            b2,
            input: t.input,
            bm_outcome: t.bm_outcome,
            m_outcome: t.m_outcome,
            success: t.success,
            bob_state: t.bob_state,
            fidelity: t.recovered_fidelity,
        }
    }
}

#[derive(Serialize)]
struct TranscriptRow {
    seed: u64,
    b2: f64,
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
    bm_outcome: BellOutcome,
    m_outcome: u8,
    success: bool,
    fidelity: f64,
}

#[derive(Serialize)]
struct BranchRow {
    bell: BellOutcome,
    m: u8,
    analytic_p: f64,
    empirical_p: f64,
    stderr: f64,
    trials: u64,
}

#[derive(Serialize)]
struct BranchCheck {
    #[serde(flatten)]
    row: BranchRow,
    z: Option<f64>,
    within: bool,
}

#[derive(Serialize)]
struct RateCheck {
    analytic: f64,
    empirical: f64,
    stderr: f64,
    trials: u64,
    z: Option<f64>,
    within: bool,
}

impl RateCheck {
    fn new(rate: Proportion, analytic: f64) -> Self {
        let (z, within) = agreement(&rate, analytic);
        Self {
            analytic,
            empirical: rate.rate(),
            stderr: rate.stderr(),
            trials: rate.trials,
            z,
            within,
        }
    }
}

#[derive(Serialize)]
struct TeleportReport {
    command: &'static str,
    seed: u64,
    b2: f64,
    input: Qubit,
    trials: u64,
    sigma_limit: f64,
    success: RateCheck,
    branches: Vec<BranchCheck>,
    agrees: bool,
}

pub(super) fn teleport(a: &TeleportArgs, seed: u64, format: Format) -> Result<Report, CliError> {
    let p = channel_params(a.common.b2)?;
    let q = input_state(&a.common.state)?;
    if a.trials == 1 {
        let t = run_sampled(&p, &q, seed)?;
        let body = match format {
            Format::Json => json(&TranscriptRecord::new(&t, a.common.b2))?,
            Format::Csv => csv(&[TranscriptRow {
                seed,
                b2: a.common.b2,
                alpha_re: q.alpha.re,
                alpha_im: q.alpha.im,
                beta_re: q.beta.re,
                beta_im: q.beta.im,
                bm_outcome: t.bm_outcome,
                m_outcome: t.m_outcome,
                success: t.success,
                fidelity: t.recovered_fidelity,
            }])?,
        };
        return Ok(Report { body, ok: true });
    }

    let tree = run_analytic(&p, &q)?;
    let runs = run_batch(&p, &q, seed, a.trials)?;
    let mut counts = [[0u64; 2]; 4];
    for t in &runs {
        counts[t.bm_outcome.position()][usize::from(t.m_outcome)] += 1;
    }
    let branches: Vec<BranchCheck> = tree
        .branches
        .iter()
        .map(|b| {
            let rate = Proportion::new(counts[b.bell.position()][usize::from(b.m)], a.trials);
            let (z, within) = agreement(&rate, b.probability);
            BranchCheck {
                row: BranchRow {
                    bell: b.bell,
                    m: b.m,
                    analytic_p: b.probability,
                    empirical_p: rate.rate(),
                    stderr: rate.stderr(),
                    trials: a.trials,
                },
                z,
                within,
            }
        })
        .collect();
    let success = RateCheck::new(
        Proportion::from_flags(runs.iter().map(|t| t.success)),
        tree.success_probability(),
    );
    let agrees = success.within && branches.iter().all(|b| b.within);
    let body = match format {
        Format::Json => json(&TeleportReport {
            command: "teleport",
            seed,
            b2: a.common.b2,
            input: q,
            trials: a.trials,
            sigma_limit: SIGMA_LIMIT,
            success,
            branches,
            agrees,
        })?,
        Format::Csv => csv(&branches.into_iter().map(|b| b.row).collect::<Vec<_>>())?,
    };
    Ok(Report { body, ok: agrees })
}

#[derive(Serialize)]
struct CurveRow {
    n: u32,
    closed_form: f64,
    empirical: f64,
    stderr: f64,
    episodes: u64,
}

#[derive(Serialize)]
struct CurvePoint {
    #[serde(flatten)]
    row: CurveRow,
    within: bool,
}

#[derive(Serialize)]
struct DecodeAccuracy {
    decoded: u64,
    correct: u64,
    accuracy: Option<f64>,
}

#[derive(Serialize)]
struct OtReport {
    command: &'static str,
    mode: &'static str,
    seed: u64,
    b2: f64,
    trials: u64,
    transferred_state: Qubit,
    encoding: Option<BitEncoding>,
    bit: Option<u8>,
    non_oblivious: bool,
    note: Option<&'static str>,
    sigma_limit: f64,
    learn_rate: RateCheck,
    decode_accuracy: Option<DecodeAccuracy>,
    repetition_curve: Vec<CurvePoint>,
    agrees: bool,
}

pub(super) fn ot(a: &OtArgs, seed: u64, format: Format) -> Result<Report, CliError> {
    let p = channel_params(a.common.b2)?;
    let enc = match (a.mode, a.encoding) {
        (OtMode::Qubit, _) => None,
        (OtMode::Bit, EncodingName::PlusMinus) => Some(BitEncoding::plus_minus()),
        (OtMode::Bit, EncodingName::Computational) => Some(BitEncoding::computational()),
    };
    let transferred = match &enc {
        Some(e) => e.state(a.bit),
        None => input_state(&a.common.state)?,
    };
    let non_oblivious = enc.is_some_and(|e| e.is_computational());

    let (learned, decode_accuracy) = match &enc {
        None => (learn_rate(&p, &transferred, seed, a.trials)?, None),
        Some(e) => {
            let results: Vec<(bool, Option<u8>)> = (0..a.trials)
                .into_par_iter()
                .map(|k| ot_bit(&p, a.bit, e, trial_seed(seed, k)).map(|r| (r.bob_learned, r.decoded_bit)))
                .collect::<crate::Result<_>>()?;
            let decoded = results.iter().filter(|r| r.1.is_some()).count() as u64;
            let correct = results.iter().filter(|r| r.1 == Some(a.bit)).count() as u64;
            let acc = DecodeAccuracy {
                decoded,
                correct,
                accuracy: (decoded > 0).then(|| correct as f64 / decoded as f64),
            };
            (Proportion::from_flags(results.iter().map(|r| r.0)), Some(acc))
        }
    };
    let analytic = if non_oblivious { 1.0 } else { p.success_probability() };
    let learn = RateCheck::new(learned, analytic);

    // every transfer of the computational encoding succeeds, so there is no curve to draw
    let mut curve = Vec::new();
    if !non_oblivious {
        for n in 1..=a.repetitions {
            let closed_form = repeated_ot_probability(&p, n)?;
            let rate = repeated_ot_rate(&p, &transferred, n, trial_seed(seed, u64::from(n)), a.trials)?;
            curve.push(CurvePoint {
                row: CurveRow {
                    n,
                    closed_form,
                    empirical: rate.rate(),
                    stderr: rate.stderr(),
                    episodes: rate.trials,
                },
                within: rate.within_sigma(closed_form, SIGMA_LIMIT),
            });
        }
    }
    let agrees = learn.within
        && curve.iter().all(|c| c.within)
        && decode_accuracy.as_ref().is_none_or(|d| d.correct == d.decoded);
    let body = match format {
        Format::Json => json(&OtReport {
            command: "ot",
            mode: match a.mode {
                OtMode::Qubit => "qubit",
                OtMode::Bit => "bit",
            },
            seed,
            b2: a.common.b2,
            trials: a.trials,
            transferred_state: transferred,
            encoding: enc,
            bit: enc.map(|_| a.bit),
            non_oblivious,
            note: non_oblivious.then_some("non-oblivious encoding: Bob decodes every bit without the ancilla"),
            sigma_limit: SIGMA_LIMIT,
            learn_rate: learn,
            decode_accuracy,
            repetition_curve: curve,
            agrees,
        })?,
        Format::Csv => csv(&curve.into_iter().map(|c| c.row).collect::<Vec<_>>())?,
    };
    Ok(Report { body, ok: agrees })
}

#[derive(Serialize)]
struct FakeBmReport {
    command: &'static str,
    attack: &'static str,
    b2: f64,
    input: Qubit,
    true_outcome: BellOutcome,
    reported_outcome: BellOutcome,
    outcome: AttackOutcome,
}

#[derive(Serialize)]
struct PauliReport {
    command: &'static str,
    attack: &'static str,
    b2: f64,
    input: Qubit,
    coefficients: [C64; 4],
    equivalent_to_honest: bool,
    note: Option<&'static str>,
    /// `(delta1, delta2)` of the `psi_1` branch.
    delta: [C64; 2],
    total_success_probability: f64,
    outcomes: Vec<AttackOutcome>,
}

#[derive(Serialize)]
struct Joint {
    z: JointDistribution,
    x: JointDistribution,
}

#[derive(Serialize)]
struct EntangleReport {
    command: &'static str,
    attack: &'static str,
    b2: f64,
    input: Qubit,
    mutual_information_z_bits: f64,
    mutual_information_x_bits: f64,
    joint_distribution: Joint,
    outcome: AttackOutcome,
}

fn bell(i: u8) -> BellOutcome {
    BellOutcome::from_index(i).expect("range checked by the parser")
}

pub(super) fn attack(cmd: &AttackCommand, format: Format) -> Result<Report, CliError> {
    json_only(format, "attack")?;
    let body = match cmd {
        AttackCommand::FakeBm(a) => {
            let p = channel_params(a.common.b2)?;
            let q = input_state(&a.common.state)?;
            let cfg = FakeBmConfig {
                true_outcome: bell(a.true_outcome),
                reported_outcome: bell(a.reported),
            };
            json(&FakeBmReport {
                command: "attack",
                attack: "fake-bm",
                b2: a.common.b2,
                input: q,
                true_outcome: cfg.true_outcome,
                reported_outcome: cfg.reported_outcome,
                outcome: fake_bm_attack(&p, &q, cfg)?,
            })?
        }
        AttackCommand::Pauli(a) => {
            let p = channel_params(a.common.b2)?;
            let q = input_state(&a.common.state)?;
            let cfg = PauliAttackConfig::new(parse_coefficients(&a.k)?).map_err(|e| CliError::Usage(format!("--k: {e}")))?;
            let outcomes = unitary_attack(&p, &q, &cfg)?;
            let trivial = cfg.is_trivial();
            json(&PauliReport {
                command: "attack",
                attack: "pauli",
                b2: a.common.b2,
                input: q,
                coefficients: cfg.coefficients(),
                equivalent_to_honest: trivial,
                note: trivial.then_some("equivalent to honest protocol"),
                delta: delta_coefficients(&q, &cfg),
                total_success_probability: outcomes.iter().map(|o| o.bell_probability * o.success_probability).sum(),
                outcomes,
            })?
        }
        AttackCommand::Entangle(a) => {
            let p = channel_params(a.common.b2)?;
            let q = input_state(&a.common.state)?;
            let z = entangled_joint_distribution(&p, &q, EBasis::Z)?;
            let x = entangled_joint_distribution(&p, &q, EBasis::X)?;
            json(&EntangleReport {
                command: "attack",
                attack: "entangle",
                b2: a.common.b2,
                input: q,
                mutual_information_z_bits: z.mutual_information(),
                mutual_information_x_bits: x.mutual_information(),
                joint_distribution: Joint { z, x },
                outcome: entangle_measure_attack(&p, &q)?,
            })?
        }
    };
    Ok(Report { body, ok: true })
}

#[derive(Serialize)]
struct ChannelRunReport {
    command: &'static str,
    b2: f64,
    config: SharingConfig,
    detection_probability: f64,
    report: SharingReport,
}

#[derive(Serialize)]
struct ChannelStatsReport {
    command: &'static str,
    b2: f64,
    config: SharingConfig,
    runs: u64,
    sigma_limit: f64,
    /// Analytic probability that the decoy check aborts.
    expected_decoy_rejection: f64,
    statistics: SharingStatistics,
    decoy_rejection: RateCheck,
    agrees: bool,
}

fn count(v: u64, flag: &str) -> Result<usize, CliError> {
    usize::try_from(v).map_err(|_| CliError::Usage(format!("--{flag} too large")))
}

pub(super) fn channel(a: &ChannelArgs, seed: u64, format: Format) -> Result<Report, CliError> {
    json_only(format, "channel")?;
    let p = channel_params(a.b2)?;
    let cfg = SharingConfig {
        n: count(a.n, "n")?,
        m: count(a.m, "m")?,
        k: count(a.k, "k")?,
        eavesdropper: match a.eavesdropper {
            EavesdropperName::None => Eavesdropper::None,
            EavesdropperName::InterceptResend => Eavesdropper::InterceptResend,
        },
        seed,
    };
    let k = u32::try_from(a.k).map_err(|_| CliError::Usage("--k too large".into()))?;
    let detection = detection_probability(k)?;
    if a.runs == 1 {
        let report = share_channel(&p, &cfg)?;
        let ok = report.accepted;
        let body = json(&ChannelRunReport {
            command: "channel",
            b2: a.b2,
            config: cfg,
            detection_probability: detection,
            report,
        })?;
        return Ok(Report { body, ok });
    }
    let statistics = sharing_statistics(&p, &cfg, a.runs)?;
    let expected = match cfg.eavesdropper {
        Eavesdropper::None => 0.0,
        Eavesdropper::InterceptResend => detection,
    };
    let decoy_rejection = RateCheck::new(statistics.rejected_at_decoys, expected);
    let agrees = decoy_rejection.within
        && (cfg.eavesdropper != Eavesdropper::None || statistics.rejected.successes == 0);
    let body = json(&ChannelStatsReport {
        command: "channel",
        b2: a.b2,
        config: cfg,
        runs: a.runs,
        sigma_limit: SIGMA_LIMIT,
        expected_decoy_rejection: expected,
        statistics,
        decoy_rejection,
        agrees,
    })?;
    Ok(Report { body, ok: agrees })
}

#[derive(Serialize)]
struct SweepRow {
    b2: f64,
    analytic_p: f64,
    empirical_p: f64,
    stderr: f64,
    trials: u64,
}

#[derive(Serialize)]
struct SweepPoint {
    #[serde(flatten)]
    row: SweepRow,
    within: bool,
}

#[derive(Serialize)]
struct SweepReport {
    command: &'static str,
    seed: u64,
    input: Qubit,
    sigma_limit: f64,
    rows: Vec<SweepPoint>,
    agrees: bool,
}

pub(super) fn sweep(a: &SweepArgs, seed: u64, format: Format) -> Result<Report, CliError> {
    let grid = parse_grid(&a.grid)?;
    let channels = grid.iter().map(|&b2| channel_params(b2)).collect::<Result<Vec<_>, _>>()?;
    let q = input_state(&a.state)?;
    let mut rows = Vec::with_capacity(grid.len());
    for (i, (p, &b2)) in channels.iter().zip(&grid).enumerate() {
        let rate = success_rate(p, &q, trial_seed(seed, i as u64), a.trials)?;
        let analytic = 2.0 * b2;
        rows.push(SweepPoint {
            row: SweepRow {
                b2,
                analytic_p: analytic,
                empirical_p: rate.rate(),
                stderr: rate.stderr(),
                trials: a.trials,
            },
            within: rate.within_sigma(analytic, SIGMA_LIMIT),
        });
    }
    let agrees = rows.iter().all(|r| r.within);
    let body = match format {
        Format::Json => json(&SweepReport {
            command: "sweep",
            seed,
            input: q,
            sigma_limit: SIGMA_LIMIT,
            rows,
            agrees,
        })?,
        Format::Csv => csv(&rows.into_iter().map(|r| r.row).collect::<Vec<_>>())?,
    };
    Ok(Report { body, ok: agrees })
}
