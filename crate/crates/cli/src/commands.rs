use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use voxbalance::dsp::{self, sinc_resample};
use voxbalance::eval::{self, io as evalio, SegmentScore};
use voxbalance::features::{self, MelConfig, SpecAugmentConfig};
use voxbalance::pipeline::{self, wav, EpochParams, EpochStats, WavSource};
use voxbalance::policy::{self, AugmentationDecision, PolicyConfig};
use voxbalance::{AudioBuffer, GenderLabel};

use crate::{
    AnalyzeArgs, AugmentArgs, BinsArgs, ExpectedDistArgs, FeaturesArgs, ForceTarget,
    ManifestArgs, SampleFormat, WerArgs,
};

fn forced_decision(
    source: GenderLabel,
    force: ForceTarget,
    config: &PolicyConfig,
    rng: &mut ChaCha8Rng,
) -> AugmentationDecision {
    let target = match force {
        ForceTarget::F => GenderLabel::Female,
        ForceTarget::M => GenderLabel::Male,
        ForceTarget::Same => source,
    };
    let prior = config.prior_for(target).expect("known target");
    let target_median = policy::sample_target_median(prior, rng);
    if target == source {
        AugmentationDecision::WithinGender { target_median }
    } else {
        AugmentationDecision::CrossGender {
            target,
            target_median,
        }
    }
}

pub fn augment(args: AugmentArgs) -> Result<()> {
    let config = args.policy.config()?;
    let mut audio = wav::read_wav(&args.input)?;
    if let Some(rate) = args.working_rate {
        audio = sinc_resample(&audio, rate)?;
    }
    let (source, how) = match args.gender {
        GenderLabel::Unknown => (policy::infer_gender(&audio), "inferred"),
        g => (g, "given"),
    };
    println!("source_gender\t{} ({how})", source.code());
    if source == GenderLabel::Unknown {
        bail!("{}: no voiced frames, cannot resolve gender", args.input.display());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed.seed);
    let decision = match args.force_target {
        Some(force) => forced_decision(source, force, &config, &mut rng),
        None => policy::decide(source, &config, &mut rng)?,
    };
    let applied = policy::apply_decision(&audio, &decision, &config)?;
    println!("decision\t{decision}");
    if let Some(reason) = applied.skipped {
        println!("skipped\t{reason}");
    }
    let effective = match applied.skipped {
        Some(_) => source,
        None => decision.effective_gender(source),
    };
    println!("effective_gender\t{}", effective.code());
    match args.format {
        SampleFormat::Pcm16 => wav::write_wav_pcm16(&args.output, &applied.audio)?,
        SampleFormat::Float => wav::write_wav(&args.output, &applied.audio)?,
    }
    Ok(())
}

fn file_name_for(id: &str) -> String {
    let safe: String = id
        .chars()
        .map(|c| if c.is_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    format!("{safe}.wav")
}

pub fn augment_manifest(args: ManifestArgs) -> Result<()> {
    let config = args.policy.config()?;
    let source = WavSource {
        working_rate: args.working_rate,
    };
    let entries = pipeline::resolve_genders(pipeline::load_manifest(&args.manifest)?, &source);
    let params = EpochParams {
        epoch: args.epoch,
        base_seed: args.seed.seed,
    };
    if let Some(dir) = &args.materialize {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let mut stats = EpochStats::default();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    if args.decisions {
        writeln!(out, "id\tsource\tdecision\tskipped\teffective\tseed")?;
    }
    let mut handle = |item: Result<pipeline::AugmentedSample, pipeline::SampleError>,
                      out: &mut BufWriter<io::StdoutLock>|
     -> Result<bool> {
        stats.record(&item);
        match item {
            Ok(s) => {
                if args.decisions {
                    writeln!(
                        out,
                        "{}\t{}\t{}\t{}\t{}\t{}",
                        s.entry.id,
                        s.entry.gender.code(),
                        s.decision,
                        s.skipped.map(|r| r.to_string()).unwrap_or_else(|| "-".into()),
                        s.effective_gender.code(),
                        s.seed_used
                    )?;
                }
                if let Some(dir) = &args.materialize {
                    wav::write_wav(dir.join(file_name_for(&s.entry.id)), &s.audio)?;
                }
                Ok(true)
            }
            Err(e) => {
                eprintln!("error: {e}");
                Ok(!args.fail_fast)
            }
        }
    };

    let jobs = args.jobs.max(1);
    if jobs == 1 {
        for item in pipeline::augment_epoch_stream(&entries, &config, params, &source) {
            if !handle(item, &mut out)? {
                break;
            }
        }
    } else {
        // Bounded batches keep memory flat while preserving manifest order.
        'outer: for batch in entries.chunks(jobs * 32) {
            for item in pipeline::augment_epoch_parallel(batch, &config, params, &source, jobs) {
                if !handle(item, &mut out)? {
                    break 'outer;
                }
            }
        }
    }
    writeln!(out, "{stats}")?;
    out.flush()?;
    if stats.errors > 0 {
        bail!("{} segment(s) failed", stats.errors);
    }
    Ok(())
}

pub fn analyze(args: AnalyzeArgs) -> Result<()> {
    let audio = wav::read_wav(&args.input)?;
    println!("sample_rate\t{}", audio.sample_rate());
    println!("duration_s\t{:.3}", audio.duration_seconds());
    let contour = dsp::estimate_default(&audio)?;
    println!("voiced_fraction\t{:.3}", contour.voiced_fraction());
    match contour.median_f0() {
        Ok(m) => println!("median_f0\t{m:.2}"),
        Err(_) => println!("median_f0\tunvoiced"),
    }
    match contour.mean_f0() {
        Some(m) => println!("mean_f0\t{m:.2}"),
        None => println!("mean_f0\tunvoiced"),
    }
    println!("inferred_gender\t{}", policy::infer_gender(&audio).code());
    Ok(())
}

pub fn features(args: FeaturesArgs) -> Result<()> {
    let audio = sinc_resample(&wav::read_wav(&args.input)?, args.working_rate)?;
    let config = MelConfig {
        channels: args.channels,
        ..MelConfig::default()
    };
    let mut m = match args.vtlp_factor {
        Some(f) => features::log_mel_spectrogram_warped(&audio, &config, f, dsp::vtlp::DEFAULT_BOUNDARY_HZ)?,
        None => features::log_mel_spectrogram(&audio, &config)?,
    };
    if args.spec_augment {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed.seed);
        let cfg = SpecAugmentConfig {
            max_freq_mask: args.max_freq_mask,
            max_time_mask: args.max_time_mask,
            ..SpecAugmentConfig::default()
        };
        m = features::spec_augment(&m, &mut rng, &cfg);
    }
    match &args.output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            m.write_tsv(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            m.write_tsv(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn load_scores(
    refs: &[evalio::Transcript],
    hyp: &Path,
    meta: &[evalio::SegmentMeta],
    meta_path: &Path,
) -> Result<Vec<SegmentScore>> {
    let hyps = evalio::read_transcripts(hyp)?;
    Ok(evalio::score_segments(refs, &hyps, meta, hyp, meta_path)?)
}

pub fn wer(args: WerArgs) -> Result<()> {
    let refs = evalio::read_transcripts(&args.reference)?;
    let meta = evalio::read_meta(&args.meta)?;
    let system = load_scores(&refs, &args.hyp, &meta, &args.meta)?;
    let baseline = args
        .baseline_hyp
        .as_deref()
        .map(|p| load_scores(&refs, p, &meta, &args.meta))
        .transpose()?;

    let mut out = BufWriter::new(io::stdout().lock());
    write!(out, "group\tsegments\twords\terrors\twer")?;
    if baseline.is_some() {
        write!(out, "\tbaseline_wer\twerr")?;
    }
    writeln!(out)?;
    for (label, group) in [
        ("Overall", None),
        ("F", Some(GenderLabel::Female)),
        ("M", Some(GenderLabel::Male)),
    ] {
        let selected: Vec<_> = system
            .iter()
            .filter(|s| group.is_none_or(|g| s.gender == g))
            .collect();
        if selected.is_empty() {
            writeln!(out, "{label}\t0\t0\t0\t-")?;
            continue;
        }
        let words: usize = selected.iter().map(|s| s.breakdown.ref_words).sum();
        let errors: usize = selected.iter().map(|s| s.breakdown.errors()).sum();
        let sys_wer = eval::corpus_wer(&system, group)?;
        write!(out, "{label}\t{}\t{words}\t{errors}\t{sys_wer:.2}", selected.len())?;
        if let Some(base) = &baseline {
            let base_wer = eval::corpus_wer(base, group)?;
            let werr = eval::werr(base_wer, sys_wer)
                .map(|w| format!("{w:.2}"))
                .unwrap_or_else(|_| "-".into());
            write!(out, "\t{base_wer:.2}\t{werr}")?;
        }
        writeln!(out)?;
    }
    if let (true, Some(base)) = (args.bootstrap, &baseline) {
        let r = eval::bootstrap_significance(base, &system, args.resamples, args.confidence, args.seed.seed)?;
        writeln!(
            out,
            "bootstrap\tdiff={:.4}\tci{}=[{:.4}, {:.4}]\tresamples={}\tsignificant={}",
            r.difference, r.confidence, r.lower, r.upper, r.n_resamples, r.significant
        )?;
    }
    out.flush()?;
    Ok(())
}

fn measure_mean_f0(path: &Path) -> Result<Option<f64>> {
    let audio: AudioBuffer = wav::read_wav(path)?;
    Ok(dsp::estimate_default(&audio).ok().and_then(|c| c.mean_f0()))
}

pub fn bins(args: BinsArgs) -> Result<()> {
    let refs = evalio::read_transcripts(&args.reference)?;
    let mut meta = evalio::read_meta(&args.meta)?;
    for m in &mut meta {
        if let (None, Some(path)) = (m.mean_f0, &m.audio_path) {
            m.mean_f0 = measure_mean_f0(path)?;
        }
    }
    let baseline = load_scores(&refs, &args.baseline_hyp, &meta, &args.meta)?;
    let system = load_scores(&refs, &args.hyp, &meta, &args.meta)?;
    let report = eval::binned_werr_report(&baseline, &system, args.bin_width)?;
    match &args.output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            evalio::write_bins_tsv(&mut w, &report)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            evalio::write_bins_tsv(&mut w, &report)?;
            w.flush()?;
        }
    }
    eprintln!(
        "total_words\t{}\texcluded_unvoiced_words\t{}",
        report.total_words, report.excluded_unvoiced_words
    );
    Ok(())
}

pub fn expected_dist(args: ExpectedDistArgs) -> Result<()> {
    let config = args.policy.config()?;
    if !(0.0..=1.0).contains(&args.base_f) {
        bail!("--base-f must lie in [0, 1], got {}", args.base_f);
    }
    let (f, m) = policy::expected_gender_distribution(&config, (args.base_f, 1.0 - args.base_f))?;
    println!("female {f:.2} male {m:.2}");
    Ok(())
}
