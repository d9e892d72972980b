use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bfcs::data::{read_table, write_table};
use bfcs::eval::{evaluate, write_curve};
use bfcs::format::sig;
use bfcs::scan::{read_marker_map, read_regulation_records};
use bfcs::simulate::{
    generate_grn, read_edge_list, run_consistency_experiment, sample_grn_data,
    summarize_consistency, write_consistency_table, write_edge_list, write_marker_probabilities,
    ConsistencySettings, GeneratorKind,
};
use bfcs::{
    compute_correlations, correlation::triplet_from_columns, load_dataset, log_bayes_factors,
    posterior, prior_from_counts, prior_from_file, scan, uniform_model_prior, with_threads,
    write_regulation_matrix, AnalysisConfig, CiModel, CorrelationTriplet, Dataset, EvalSummary,
    LoadOptions, Role, ScanFilter, ScoredEdges, StructurePrior,
};
use serde_json::json;

use crate::manifest::{sidecar, FileDigest, RunManifest};
use crate::{
    ConsistencyArgs, DataError, EvalArgs, GrnArgs, ModelArgs, PriorChoice, ReplayArgs, ScanArgs,
    SimulateCommand, TripletArgs,
};

pub fn dispatch(command: crate::Command, argv: &[String]) -> Result<()> {
    use crate::Command::*;
    match command {
        Triplet(a) => triplet(a),
        Scan(a) => scan_cmd(a, argv),
        Simulate(SimulateCommand::Grn(a)) => simulate_grn(a, argv),
        Simulate(SimulateCommand::Consistency(a)) => simulate_consistency(a, argv),
        Eval(a) => eval_cmd(a, argv),
        Replay(a) => replay(a),
    }
}

impl ModelArgs {
    fn config(&self) -> Result<AnalysisConfig> {
        let cfg = AnalysisConfig {
            nu: self.nu,
            center_data: !self.no_center,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn structure_prior(&self) -> Result<StructurePrior> {
        Ok(match &self.prior {
            PriorChoice::Family(f) => prior_from_counts(*f),
            PriorChoice::UniformModels => uniform_model_prior(),
            PriorChoice::Custom(path) => prior_from_file(path)?,
        })
    }

    fn prior_path(&self) -> Option<&Path> {
        match &self.prior {
            PriorChoice::Custom(path) => Some(path),
            _ => None,
        }
    }

    fn manifest_config(&self) -> serde_json::Value {
        json!({ "prior": self.prior.to_string(), "nu": self.nu, "center_data": !self.no_center })
    }
}

fn with_optional_threads<R: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> R + Send,
) -> Result<R> {
    match threads {
        Some(0) => {
            Err(bfcs::BfcsError::InvalidConfig("--threads must be at least 1".into()).into())
        }
        Some(t) => Ok(with_threads(t, f)?),
        None => Ok(f()),
    }
}

/// Use the given seed, or draw one, announce it, and append it to `argv`
/// so the manifest replays with the same value.
fn resolve_seed(seed: Option<u64>, argv: &[String]) -> (u64, Vec<String>) {
    let mut argv = argv.to_vec();
    let seed = seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s} (generated)");
        argv.push("--seed".into());
        argv.push(s.to_string());
        s
    });
    (seed, argv)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn triplet(a: TripletArgs) -> Result<()> {
    let cfg = a.model.config()?;
    let prior = a.model.structure_prior()?;
    let t = match &a.data {
        Some(path) => {
            let table = read_table(path, &LoadOptions::default())?;
            if table.columns.len() != 3 {
                return Err(bfcs::BfcsError::InvalidDataset(format!(
                    "{}: expected 3 columns, found {}",
                    path.display(),
                    table.columns.len()
                ))
                .into());
            }
            let d = Dataset::new(table.names, vec![Role::Trait; 3], table.columns)?;
            triplet_from_columns(d.column(0), d.column(1), d.column(2), cfg.center_data)
        }
        None => CorrelationTriplet::new(
            a.r12.expect("required by clap"),
            a.r13.expect("required by clap"),
            a.r23.expect("required by clap"),
            a.n.expect("required by clap"),
        ),
    };
    let bf = log_bayes_factors(&t, &cfg)?;
    let post = posterior(&bf, &prior)?;

    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "# r12={} r13={} r23={} n={}",
        sig(t.r12, 6),
        sig(t.r13, 6),
        sig(t.r23, 6),
        t.n
    )?;
    writeln!(out, "# nu={} prior={}", cfg.nu, a.model.prior)?;
    writeln!(out, "model\tstructure\tlog10_bf\tbf\tprior\tposterior")?;
    for m in CiModel::ALL {
        writeln!(
            out,
            "{m}\t{}\t{}\t{}\t{}\t{}",
            m.description(),
            sig(bf.log10(m), 6),
            sig(bf.linear(m), 6),
            sig(prior.get(m), 6),
            sig(post.get(m), 6)
        )?;
    }
    writeln!(
        out,
        "chain_probability\t{}",
        sig(post.get(CiModel::CAUSAL_CHAIN), 6)
    )?;
    Ok(())
}

fn scan_cmd(a: ScanArgs, argv: &[String]) -> Result<()> {
    let cfg = a.model.config()?;
    let prior = a.model.structure_prior()?;
    let data = load_dataset(&a.expression, &a.genotype, &LoadOptions::default())?;
    let output = with_optional_threads(a.threads, || -> Result<_> {
        let store = compute_correlations(&data, &cfg);
        let filter = match (&a.top_k_markers, &a.marker_map) {
            (Some(k), _) => ScanFilter::TopK(*k),
            (None, Some(path)) => ScanFilter::from_named_pairs(&store, &read_marker_map(path)?)?,
            (None, None) => ScanFilter::All,
        };
        Ok(scan(&store, &prior, &cfg, &filter)?)
    })??;
    write_regulation_matrix(&output.matrix, &a.out)?;
    eprintln!("{}", output.summary);

    let mut config = a.model.manifest_config();
    config["top_k_markers"] = json!(a.top_k_markers);
    config["marker_map"] = json!(a.marker_map.as_ref().map(|p| p.display().to_string()));
    let inputs: Vec<&Path> = [
        Some(a.expression.as_path()),
        Some(a.genotype.as_path()),
        a.marker_map.as_deref(),
        a.model.prior_path(),
    ]
    .into_iter()
    .flatten()
    .collect();
    RunManifest::new("scan", argv, None, config)?
        .with_inputs(inputs)?
        .with_outputs([a.out.as_path()])?
        .write(&sidecar(&a.out))
}

fn simulate_grn(a: GrnArgs, argv: &[String]) -> Result<()> {
    let (seed, argv) = resolve_seed(a.seed, argv);
    let spec = generate_grn(a.genes, a.edges, seed)?;
    let data = sample_grn_data(&spec, a.samples, seed)?;
    create_dir(&a.out_dir)?;

    let paths: Vec<PathBuf> = [
        "expression.tsv",
        "genotype.tsv",
        "truth_edges.tsv",
        "marker_probs.tsv",
    ]
    .iter()
    .map(|f| a.out_dir.join(f))
    .collect();
    for (path, role) in [(&paths[0], Role::Trait), (&paths[1], Role::Marker)] {
        let idx = data.indices_with_role(role);
        let names: Vec<String> = idx.iter().map(|&c| data.names()[c].clone()).collect();
        let columns: Vec<&[f64]> = idx.iter().map(|&c| data.column(c)).collect();
        write_table(path, &names, &columns)?;
    }
    write_edge_list(&spec, &paths[2])?;
    write_marker_probabilities(&spec, &paths[3])?;
    eprintln!(
        "wrote {} markers, {} traits, {} samples, {} true edges to {}",
        a.genes,
        a.genes,
        a.samples,
        spec.edges().len(),
        a.out_dir.display()
    );

    let config = json!({ "genes": a.genes, "edges": a.edges, "samples": a.samples });
    RunManifest::new("simulate grn", &argv, Some(seed), config)?
        .with_outputs(paths.iter().map(PathBuf::as_path))?
        .write(&a.out_dir.join("manifest.json"))
}

fn simulate_consistency(a: ConsistencyArgs, argv: &[String]) -> Result<()> {
    let (seed, argv) = resolve_seed(a.seed, argv);
    let cfg = a.model.config()?;
    let prior = a.model.structure_prior()?;
    let settings = ConsistencySettings {
        kinds: a
            .models
            .iter()
            .flat_map(|&model| {
                a.x1.iter()
                    .map(move |&x1_kind| GeneratorKind { model, x1_kind })
            })
            .collect(),
        sizes: a.sizes.clone(),
        reps: a.reps,
        seed,
    };
    let rows = with_optional_threads(a.threads, || {
        run_consistency_experiment(&settings, &prior, &cfg)
    })??;
    write_consistency_table(&rows, &a.out)?;

    let mut out = std::io::stdout().lock();
    writeln!(out, "model\tx1\tn\tcount\tmissing\tq1\tmedian\tq3")?;
    for s in summarize_consistency(&rows) {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.model.name(),
            s.x1_kind.name(),
            s.n,
            s.count,
            s.missing,
            sig(s.q1, 6),
            sig(s.median, 6),
            sig(s.q3, 6)
        )?;
    }

    let mut config = a.model.manifest_config();
    config["models"] = json!(a.models.iter().map(|m| m.name()).collect::<Vec<_>>());
    config["x1"] = json!(a.x1.iter().map(|k| k.name()).collect::<Vec<_>>());
    config["sizes"] = json!(a.sizes);
    config["reps"] = json!(a.reps);
    RunManifest::new("simulate consistency", &argv, Some(seed), config)?
        .with_inputs(a.model.prior_path())?
        .with_outputs([a.out.as_path()])?
        .write(&sidecar(&a.out))
}

fn eval_cmd(a: EvalArgs, argv: &[String]) -> Result<()> {
    let predictions = read_regulation_records(&a.predictions)?;
    let truth = read_edge_list(&a.truth)?;
    let scored = ScoredEdges::from_predictions(&predictions, &truth)?;
    let (roc, pr, summary) = evaluate(&scored)?;
    create_dir(&a.out_dir)?;

    let roc_path = a.out_dir.join("roc.tsv");
    let pr_path = a.out_dir.join("pr.tsv");
    let summary_path = a.out_dir.join("summary.tsv");
    write_curve(&roc, "fpr", "tpr", &roc_path)?;
    write_curve(&pr, "recall", "precision", &pr_path)?;
    let text = format!("{}\n{}\n", EvalSummary::HEADER, summary.line());
    fs::write(&summary_path, &text)
        .with_context(|| format!("cannot write {}", summary_path.display()))?;
    print!("{text}");

    RunManifest::new("eval", argv, None, json!({}))?
        .with_inputs([a.predictions.as_path(), a.truth.as_path()])?
        .with_outputs([
            roc_path.as_path(),
            pr_path.as_path(),
            summary_path.as_path(),
        ])?
        .write(&a.out_dir.join("manifest.json"))
}

fn replay(a: ReplayArgs) -> Result<()> {
    let manifest = RunManifest::read(&a.manifest)?;
    if manifest.version != crate::manifest::VERSION {
        eprintln!(
            "warning: manifest written by {} {}, replaying with {}",
            manifest.tool,
            manifest.version,
            crate::manifest::VERSION
        );
    }
    std::env::set_current_dir(&manifest.working_dir)
        .with_context(|| format!("cannot enter {}", manifest.working_dir.display()))?;
    for recorded in &manifest.inputs {
        let now = FileDigest::of(Path::new(&recorded.path))?;
        if now.sha256 != recorded.sha256 {
            return Err(DataError(format!(
                "input {} changed since the manifest was written",
                recorded.path
            ))
            .into());
        }
    }
    let args: Vec<OsString> = manifest.argv.iter().map(OsString::from).collect();
    crate::run(&args)?;
    for recorded in &manifest.outputs {
        let now = FileDigest::of(Path::new(&recorded.path))?;
        if now.sha256 != recorded.sha256 {
            return Err(DataError(format!(
                "output {} differs from the recorded run",
                recorded.path
            ))
            .into());
        }
    }
    eprintln!(
        "replayed {}: {} outputs identical",
        manifest.subcommand,
        manifest.outputs.len()
    );
    Ok(())
}
