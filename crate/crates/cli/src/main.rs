mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use voxbalance::policy::{PolicyConfig, PolicyKind};
use voxbalance::GenderLabel;

#[derive(Parser)]
#[command(name = "voxbalance", version, about = "Gender-rebalancing speech augmentation and fairness scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply one policy draw to a WAV file.
    Augment(AugmentArgs),
    /// Stream one augmentation epoch over a manifest and print decision statistics.
    AugmentManifest(ManifestArgs),
    /// Print pitch statistics and the inferred gender of a WAV file.
    Analyze(AnalyzeArgs),
    /// Emit log-mel features as TSV, one frame per line.
    Features(FeaturesArgs),
    /// Overall and per-gender WER, with WERR against an optional baseline.
    Wer(WerArgs),
    /// f0-binned WERR report for two systems.
    Bins(BinsArgs),
    /// Expected post-augmentation gender distribution.
    ExpectedDist(ExpectedDistArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyName {
    Opposite,
    Random,
}

#[derive(Args)]
struct PolicyArgs {
    #[arg(long, value_enum, default_value = "random")]
    policy: PolicyName,
    /// Opposite: probability of turning a female segment male.
    #[arg(long = "p-f2m", default_value_t = 0.3)]
    p_f2m: f64,
    /// Opposite: probability of turning a male segment female.
    #[arg(long = "p-m2f", default_value_t = 0.7)]
    p_m2f: f64,
    /// Random: probability of augmenting a segment.
    #[arg(long = "p-r", default_value_t = 0.5)]
    p_r: f64,
    /// Shift f0 only on cross-gender decisions.
    #[arg(long)]
    no_formant_shifting: bool,
    /// Random: always target the source gender.
    #[arg(long)]
    no_gender_switching: bool,
}

impl PolicyArgs {
    fn config(&self) -> voxbalance::Result<PolicyConfig> {
        let kind = match self.policy {
            PolicyName::Opposite => PolicyKind::Opposite {
                p_f_to_m: self.p_f2m,
                p_m_to_f: self.p_m2f,
            },
            PolicyName::Random => PolicyKind::Random { p_r: self.p_r },
        };
        let mut config = PolicyConfig::with_kind(kind)?;
        config.formant_shifting = !self.no_formant_shifting;
        config.gender_switching = !self.no_gender_switching;
        Ok(config)
    }
}

#[derive(Args)]
struct SeedArg {
    #[arg(long, env = "VOXBALANCE_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ForceTarget {
    #[value(name = "F")]
    F,
    #[value(name = "M")]
    M,
    Same,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleFormat {
    Pcm16,
    Float,
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Source gender; U infers it from the median f0.
    #[arg(long, default_value = "U", value_parser = parse_gender)]
    gender: GenderLabel,
    /// Bypass the policy draw and shift toward this target.
    #[arg(long, value_enum)]
    force_target: Option<ForceTarget>,
    /// Resample to this rate before processing.
    #[arg(long)]
    working_rate: Option<u32>,
    #[arg(long, value_enum, default_value = "pcm16")]
    format: SampleFormat,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct ManifestArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 0)]
    epoch: u64,
    #[arg(long, default_value_t = 16_000)]
    working_rate: u32,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Stop at the first failing segment.
    #[arg(long)]
    fail_fast: bool,
    /// Write each augmented segment to this directory as `<id>.wav`.
    #[arg(long, value_name = "DIR")]
    materialize: Option<PathBuf>,
    /// Also print one decision line per segment.
    #[arg(long)]
    decisions: bool,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct FeaturesArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output TSV; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 80)]
    channels: usize,
    #[arg(long, default_value_t = 16_000)]
    working_rate: u32,
    /// Apply one frequency and one time mask.
    #[arg(long)]
    spec_augment: bool,
    #[arg(long, default_value_t = 27)]
    max_freq_mask: usize,
    #[arg(long, default_value_t = 100)]
    max_time_mask: usize,
    /// Warp spectra with this VTLP factor before mel projection.
    #[arg(long)]
    vtlp_factor: Option<f64>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct WerArgs {
    /// Reference transcripts (`id<TAB>text`).
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    hyp: PathBuf,
    /// Segment metadata TSV with `id` and `gender` columns.
    #[arg(long)]
    meta: PathBuf,
    /// Baseline hypotheses for WERR.
    #[arg(long)]
    baseline_hyp: Option<PathBuf>,
    /// Paired bootstrap against the baseline.
    #[arg(long, requires = "baseline_hyp")]
    bootstrap: bool,
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
    #[arg(long, default_value_t = 95.0)]
    confidence: f64,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct BinsArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    baseline_hyp: PathBuf,
    #[arg(long)]
    hyp: PathBuf,
    /// Metadata with `mean_f0`, or `audio_path` to measure it.
    #[arg(long)]
    meta: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    bin_width: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExpectedDistArgs {
    /// Female fraction of the training data.
    #[arg(long, default_value_t = 0.3)]
    base_f: f64,
    #[command(flatten)]
    policy: PolicyArgs,
}

fn parse_gender(s: &str) -> Result<GenderLabel, String> {
    s.parse().map_err(|e: voxbalance::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Augment(a) => commands::augment(a),
        Command::AugmentManifest(a) => commands::augment_manifest(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Features(a) => commands::features(a),
        Command::Wer(a) => commands::wer(a),
        Command::Bins(a) => commands::bins(a),
        Command::ExpectedDist(a) => commands::expected_dist(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", render(&e));
            ExitCode::from(1)
        }
    }
}

/// Joins the error chain, skipping causes already spelled out by their parent.
fn render(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !msg.ends_with(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    msg
}
