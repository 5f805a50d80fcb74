//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod oracles;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use veracity_core::acoustic::dsp::{dct_matrix, frame_geometry};
use veracity_core::acoustic::{compute_jitter, estimate_f0, AcousticConfig};
use veracity_core::corpus::{generate_synthetic_corpus, parse_transcript_str, AUFrame, Label, SynthConfig, AU_COUNT};
use veracity_core::fusion::{
    allocate_frames, largest_remainder, parse_report_csv, reference_rows, EvalConfig, Evaluator, Method, RowSource,
    WordLengthUnit, NOT_REPRODUCED,
};
use veracity_core::lexical::{build_vocabulary, vectorize, Lexicons, PosWeights};
use veracity_core::svm::{train_svm, TrainConfig};
use veracity_core::visual::aggregate_au_presence;

use oracles::{brute_force_presence, reference_svm};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_veracity")
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(bin()).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("`veracity {}` exited with {:?}: {}", args.join(" "), out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("temporary paths are valid UTF-8")
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn svm_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst_diff = 0.0f64;
    let mut worst_ref_gap = 0.0f64;
    let mut problems = 0;
    for dataset in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + dataset);
        let labels: Vec<Label> = (0..10).map(|i| if i % 2 == 0 { Label::Deceptive } else { Label::Truthful }).collect();
        let signs: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
        let rows: Vec<Vec<f64>> = signs.iter().map(|&s| vec![0.8 * s + normal(&mut rng), 0.4 * s + normal(&mut rng)]).collect();
        for c in [0.1, 1.0, 10.0] {
            problems += 1;
            let cfg = TrainConfig { c_penalty: c, seed: dataset, ..TrainConfig::default() };
            let model = train_svm(&rows, &labels, &cfg).map_err(|e| e.to_string())?;
            let reference = reference_svm(&rows, &signs, c, 1e-10, 2_000_000);
            worst_ref_gap = worst_ref_gap.max(reference.certified_gap);
            let diff = (model.diagnostics.dual_objective - reference.dual_objective).abs();
            worst_diff = worst_diff.max(diff);
            if diff > 1e-6 {
                return Err(format!("dataset {dataset} C {c}: dual {} vs reference {} (diff {diff:.3e})", model.diagnostics.dual_objective, reference.dual_objective));
            }
            let slack = 10.0 * cfg.tolerance;
            let balance: f64 = model.alphas.iter().zip(&signs).map(|(a, s)| a * s).sum();
            if balance.abs() > 1e-9 {
                return Err(format!("dataset {dataset} C {c}: sum y*alpha = {balance:e}"));
            }
            for ((x, s), &a) in rows.iter().zip(&signs).zip(&model.alphas) {
                let ym = s * model.predict_margin(x).map_err(|e| e.to_string())?;
                let ok = (0.0..=c).contains(&a)
                    && if a == 0.0 {
                        ym >= 1.0 - slack
                    } else if a == c {
                        ym <= 1.0 + slack
                    } else {
                        (ym - 1.0).abs() <= slack
                    };
                if !ok {
                    return Err(format!("dataset {dataset} C {c}: KKT violated at alpha {a}, y*f {ym}"));
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        elapsed < 10.0 && worst_ref_gap <= 1e-10,
        format!("{problems} problems, max |dual diff| {worst_diff:.2e}, reference gap <= {worst_ref_gap:.1e}, KKT ok, {elapsed:.2} s"),
    )
}

fn analytic_pair() -> Outcome {
    let rows = vec![vec![-1.0], vec![1.0]];
    let m = train_svm(&rows, &[Label::Truthful, Label::Deceptive], &TrainConfig::default()).map_err(|e| e.to_string())?;
    let lo = m.predict_margin(&[-1.0]).map_err(|e| e.to_string())?;
    let hi = m.predict_margin(&[1.0]).map_err(|e| e.to_string())?;
    let ok = (m.weights[0] - 1.0).abs() < 1e-6 && m.bias.abs() < 1e-6 && (lo + 1.0).abs() < 1e-6 && (hi - 1.0).abs() < 1e-6;
    check(ok, format!("w = {:?}, b = {:.2e}, margins {lo:.6} / {hi:.6}", m.weights, m.bias))
}

fn computed_rows(csv: &str) -> Result<BTreeMap<String, f64>, String> {
    Ok(parse_report_csv(csv)?
        .into_iter()
        .filter(|r| r.source == RowSource::Computed)
        .map(|r| (r.name, r.overall))
        .collect())
}

fn end_to_end(work: &Path) -> Outcome {
    let start = Instant::now();
    let corpus = work.join("corpus");
    let out = work.join("e2e");
    run_cli(&["synth", "--seed", "42", "--n", "100", "--strength", "1.0", "--out", path_str(&corpus)])?;
    run_cli(&["evaluate", "--manifest", path_str(&corpus.join("manifest.tsv")), "--out", path_str(&out)])?;
    let elapsed = start.elapsed().as_secs_f64();
    let rows = computed_rows(&fs::read_to_string(out.join("report.csv")).map_err(|e| e.to_string())?)?;
    let get = |name: &str| rows.get(name).copied().unwrap_or(f64::NAN);
    let singles = [get("lexical"), get("acoustic"), get("visual")];
    let best_single = singles.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ok = singles.iter().all(|&a| a >= 0.90)
        && get("early_fusion") >= best_single
        && get("decision_fusion") >= 0.85
        && get("utterance_fusion") >= 0.80
        && elapsed < 120.0;
    check(
        ok,
        format!(
            "lexical {:.3}, acoustic {:.3}, visual {:.3}, early {:.3}, decision {:.3}, utterance {:.3}, {elapsed:.1} s",
            get("lexical"),
            get("acoustic"),
            get("visual"),
            get("early_fusion"),
            get("decision_fusion"),
            get("utterance_fusion")
        ),
    )
}

fn null_sanity(work: &Path) -> Outcome {
    let dir = work.join("null");
    let mut corpus = generate_synthetic_corpus(&SynthConfig::new(42, 100, 1.0), &dir).map_err(|e| e.to_string())?;
    let mut labels = corpus.labels();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(7));
    for (r, l) in corpus.records.iter_mut().zip(labels) {
        r.label = l;
    }
    let evaluator = Evaluator::new(&corpus, EvalConfig::default()).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for m in Method::standard() {
        let acc = evaluator.run(m).map_err(|e| e.to_string())?.overall();
        ok &= (0.35..=0.65).contains(&acc);
        parts.push(format!("{} {acc:.3}", m.name()));
    }
    check(ok, parts.join(", "))
}

fn au_aggregation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let levels = [0.0, 1.0, 2.5, 2.999, 3.0, 3.001, 4.0, 5.0];
    for trial in 0..1000 {
        let n = rng.random_range(1..80);
        let success_rate: f64 = rng.random();
        let frames: Vec<AUFrame> = (0..n)
            .map(|i| {
                let mut intensities = [0.0; AU_COUNT];
                for v in intensities.iter_mut() {
                    *v = if rng.random_bool(0.5) { levels[rng.random_range(0..levels.len())] } else { rng.random_range(0.0..5.0) };
                }
                AUFrame { frame_index: i, timestamp_s: i as f64 / 30.0, intensities, success: rng.random_bool(success_rate) }
            })
            .collect();
        let (threshold, ratio) = if trial % 2 == 0 { (3.0, 0.10) } else { (rng.random_range(0.5..4.5), rng.random_range(0.01..0.9)) };
        let got = aggregate_au_presence(&frames, threshold, ratio).map_err(|e| e.to_string())?;
        let (bits, untracked) = brute_force_presence(&frames, threshold, ratio);
        if got.bits != bits || got.untracked != untracked {
            return Err(format!("trial {trial}: {:?} vs oracle {:?}", got.bits, bits));
        }
    }
    Ok("1000 random frame matrices match the counting oracle".into())
}

fn frame_allocation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..1000 {
        let k = rng.random_range(1..25);
        let n_frames = rng.random_range(0..4000);
        let (counts, slices) = if trial % 2 == 0 {
            let counts: Vec<u64> = (0..k).map(|_| rng.random_range(0..40)).collect();
            if counts.iter().all(|&c| c == 0) {
                continue;
            }
            (counts.clone(), largest_remainder(&counts, n_frames))
        } else {
            let text: String = (0..k)
                .map(|_| (0..rng.random_range(1..15)).map(|_| ["so", "i", "...", "um", "went", "home"][rng.random_range(0..6)]).collect::<Vec<_>>().join(" ") + "\n")
                .collect();
            let transcript = parse_transcript_str(&text).ok_or("empty transcript")?;
            let slices = allocate_frames(&transcript, n_frames, WordLengthUnit::Tokens).map_err(|e| e.to_string())?;
            let mut next = 0;
            for s in &slices {
                if s.frames.start != next {
                    return Err(format!("trial {trial}: frame ranges are not contiguous"));
                }
                next = s.frames.end;
            }
            let counts = transcript.utterance_lengths().iter().map(|&c| c as u64).collect();
            (counts, slices.iter().map(|s| s.frames.len()).collect())
        };
        let total: u64 = counts.iter().sum();
        if slices.iter().sum::<usize>() != n_frames {
            return Err(format!("trial {trial}: allocation sums to {} not {n_frames}", slices.iter().sum::<usize>()));
        }
        for (c, &got) in counts.iter().zip(&slices) {
            let quota = n_frames as f64 * *c as f64 / total as f64;
            if (got as f64 - quota).abs() >= 1.0 {
                return Err(format!("trial {trial}: {got} frames for quota {quota}"));
            }
        }
    }
    Ok("1000 random distributions: exact sums, every count within 1 of its quota".into())
}

fn dsp_checks() -> Outcome {
    let mut worst_off = 0.0f64;
    for n in [13, 26, 40] {
        let d = dct_matrix(n);
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = d[i].iter().zip(&d[j]).map(|(a, b)| a * b).sum();
                if i == j {
                    if (dot - 1.0).abs() > 1e-9 {
                        return Err(format!("DCT row {i} of size {n} has norm^2 {dot}"));
                    }
                } else {
                    worst_off = worst_off.max(dot.abs());
                }
            }
        }
    }
    let cfg = AcousticConfig::default();
    let mut worst_rel = 0.0f64;
    for sr in [8000u32, 16000] {
        let (len, _) = frame_geometry(sr, cfg.pitch_frame_ms, cfg.hop_ms);
        for f in [120.0, 200.0, 330.0] {
            let frame: Vec<f64> = (0..len).map(|i| 0.5 * (std::f64::consts::TAU * f * i as f64 / sr as f64).sin()).collect();
            let (est, _) = estimate_f0(&frame, sr, cfg.fmin_hz, cfg.fmax_hz);
            worst_rel = worst_rel.max((est - f).abs() / f);
        }
    }
    let jitter = compute_jitter(&[150.0; 40]);
    check(
        worst_off < 1e-9 && worst_rel < 0.02 && jitter == (0.0, 0.0),
        format!("DCT max off-diagonal {worst_off:.1e}, worst f0 error {:.3}%, constant-f0 jitter {jitter:?}", 100.0 * worst_rel),
    )
}

fn lexical_micro_corpus() -> Outcome {
    let docs = [
        "I took the money in the car ... um I was nervous.",
        "The money was in the car. Um ... I am sure.",
        "I am sure ... um, the money is gone, nervous.",
        "Nervous? Sure. I ... um in the car.",
        "Money in the house ... um sure, nervous.",
        "I am nervous and sure in the money ... um",
    ];
    let transcripts: Vec<_> = docs.iter().map(|d| parse_transcript_str(d).unwrap()).collect();
    let lex = Lexicons::default();
    let vocab = build_vocabulary(&transcripts, 5, &lex).map_err(|e| e.to_string())?;
    // "the" (8) and "in" (5) are stopwords, "car" (3) is under the cutoff and "um" is a filler.
    let expected_terms = ["...", "i", "money", "nervous", "sure"];
    let expected_freq = [6, 6, 5, 5, 5];
    if vocab.terms() != expected_terms {
        return Err(format!("vocabulary {:?}", vocab.terms()));
    }
    for (t, f) in expected_terms.iter().zip(expected_freq) {
        if vocab.corpus_frequency(t) != Some(f) {
            return Err(format!("frequency of {t}: {:?}", vocab.corpus_frequency(t)));
        }
    }
    let expected = [
        [1.6, 2.8, 1.0, 1.2, 0.0],
        [1.6, 1.4, 1.0, 0.0, 1.2],
        [1.6, 1.4, 1.0, 1.2, 1.2],
        [1.6, 1.4, 0.0, 1.2, 1.2],
        [1.6, 0.0, 1.0, 1.2, 1.2],
        [1.6, 1.4, 1.0, 1.2, 1.2],
    ];
    for (i, (t, e)) in transcripts.iter().zip(&expected).enumerate() {
        let v = vectorize(&t.tokens, &vocab, &PosWeights::default());
        if v.0 != e {
            return Err(format!("document {i}: {:?} vs {e:?}", v.0));
        }
    }
    Ok("vocabulary, frequencies and 6 weighted vectors match exactly".into())
}

fn determinism(work: &Path) -> Outcome {
    let a = work.join("det_a");
    let b = work.join("det_b");
    for d in [&a, &b] {
        run_cli(&["synth", "--seed", "42", "--n", "40", "--out", path_str(&d.join("corpus"))])?;
    }
    if tree(&a.join("corpus")) != tree(&b.join("corpus")) {
        return Err("synth output differs between identical runs".into());
    }
    let manifest = a.join("corpus/manifest.tsv");
    let mut outputs: Vec<(String, BTreeMap<PathBuf, Vec<u8>>)> = Vec::new();
    for jobs in ["1", "2", "8"] {
        let out = work.join(format!("det_jobs{jobs}"));
        for cmd in ["extract", "train", "evaluate"] {
            run_cli(&[cmd, "--manifest", path_str(&manifest), "--out", path_str(&out), "--jobs", jobs])?;
        }
        outputs.push((jobs.to_string(), tree(&out)));
    }
    let repeat = work.join("det_repeat");
    for cmd in ["extract", "train", "evaluate"] {
        run_cli(&[cmd, "--manifest", path_str(&manifest), "--out", path_str(&repeat)])?;
    }
    outputs.push(("default".into(), tree(&repeat)));
    let (first_jobs, first) = &outputs[0];
    for (jobs, t) in &outputs[1..] {
        if t != first {
            return Err(format!("outputs with --jobs {jobs} differ from --jobs {first_jobs}"));
        }
    }
    check(first.contains_key(Path::new("report.csv")), format!("{} files byte-identical across --jobs 1/2/8/default and reruns", first.len()))
}

fn report_shape(work: &Path) -> Outcome {
    let out = work.join("e2e");
    let csv = fs::read_to_string(out.join("report.csv")).map_err(|e| e.to_string())?;
    let text = fs::read_to_string(out.join("report.txt")).map_err(|e| e.to_string())?;
    let rows = parse_report_csv(&csv)?;
    let computed: Vec<&str> = rows.iter().filter(|r| r.source == RowSource::Computed).map(|r| r.name.as_str()).collect();
    let expected_computed = ["lexical", "acoustic", "visual", "early_fusion", "decision_fusion", "utterance_fusion"];
    if computed != expected_computed {
        return Err(format!("computed rows {computed:?}"));
    }
    let table: [(&str, &str, &str, &str); 8] = [
        ("human_annotators_baseline", "55.93", "", ""),
        ("manual_gestures_lexical_baseline", "75.20", "", ""),
        ("lexical", "66.12", "", ""),
        ("acoustic", "34.23", "", ""),
        ("visual", "67.20", "", ""),
        ("early_fusion", "78.95", "81.10", "76.80"),
        ("decision_fusion", "76.12", "", ""),
        ("utterance_fusion", "74.02", "", ""),
    ];
    for (name, overall, truthful, deceptive) in table {
        let line = format!("{name},{overall},{truthful},{deceptive},paper_reference");
        if !csv.lines().any(|l| l == line) {
            return Err(format!("missing reference line `{line}`"));
        }
    }
    let flagged = text.lines().filter(|l| l.trim_end().ends_with(NOT_REPRODUCED)).count();
    check(
        flagged == table.len() && reference_rows().len() == table.len(),
        format!("6 computed rows, {} reference rows with published values, {flagged} flagged `{NOT_REPRODUCED}`", table.len()),
    )
}

fn main() {
    let work = tempfile::tempdir().expect("temporary directory");
    let work = work.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("SVM oracle equivalence", Box::new(svm_oracle_equivalence)),
        ("analytic SVM pair", Box::new(analytic_pair)),
        ("end-to-end synthetic corpus", Box::new(|| end_to_end(work))),
        ("null sanity with permuted labels", Box::new(|| null_sanity(work))),
        ("AU aggregation oracle", Box::new(au_aggregation)),
        ("frame allocation", Box::new(frame_allocation)),
        ("DSP checks", Box::new(dsp_checks)),
        ("lexical micro-corpus", Box::new(lexical_micro_corpus)),
        ("determinism across --jobs", Box::new(|| determinism(work))),
        ("report shape", Box::new(|| report_shape(work))),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
