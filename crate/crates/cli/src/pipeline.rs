//! Implementations of the pipeline commands. Commands communicate only
//! through files in the run directory; each one names the upstream
//! artifact it is missing instead of recomputing it.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use anyhow::{bail, Context, Result};

use ctt_core::config::RunConfig;
use ctt_core::corpus::{build_balanced_set, ingest_corpus, Corpus, Reply};
use ctt_core::detector::{run_turing_test, train_forest_detector, TrainParams};
use ctt_core::encoder::{Encoder, EncoderHandle};
use ctt_core::genharness::{
    build_persona, generate_for_message, persona_template_hash, template_hash, ChatClient,
    EndpointConfig, PromptConfig, PromptKind, RetrievalIndex, RetryPolicy,
};
use ctt_core::report::{
    emit_stepwise_deltas, round_sig, sha256_file, Cell, DetectionCell, DivergenceCell,
    ImportanceCell, ReportBundle, ReportError, RunManifest, SelectionCell, SimilarityCell,
    StepDelta, STEPWISE_LEGEND,
};
use ctt_core::selector::{
    overlap_rate, read_candidate_sets, read_outcomes, select_cosine_optimal, select_ml_optimal,
    write_candidate_sets, write_outcomes, CandidateSet, SelectionOutcome,
};
use ctt_core::semsim::pairwise_similarity;
use ctt_core::textfeat::{FeaturePipeline, LexiconSet};
use ctt_core::topics::{divergence_plot_json, divergence_report, DivergenceReport, TopicLexicon};

use crate::paths::ArtifactPaths;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    First,
    Cosine,
    Ml,
}

impl SelectionMode {
    fn cell_suffix(&self) -> &'static str {
        match self {
            SelectionMode::First => "",
            SelectionMode::Cosine => "__sel-cosine",
            SelectionMode::Ml => "__sel-ml",
        }
    }

    fn outcome_strategy(&self) -> Option<&'static str> {
        match self {
            SelectionMode::First => None,
            SelectionMode::Cosine => Some("cosine"),
            SelectionMode::Ml => Some("ml"),
        }
    }
}

pub struct Ctx {
    pub config: RunConfig,
    pub paths: ArtifactPaths,
    pub seed: u64,
    pub encoder_spec: String,
    pub jobs: usize,
}

impl Ctx {
    pub fn new(
        config: RunConfig,
        out_override: Option<&Path>,
        seed_override: Option<u64>,
        encoder_override: Option<&str>,
        jobs: usize,
    ) -> Self {
        let out = out_override
            .map(|p| p.to_path_buf())
            .unwrap_or_else(|| config.run.out.clone());
        let seed = seed_override.unwrap_or(config.run.seed);
        let encoder_spec = encoder_override
            .map(|s| s.to_string())
            .unwrap_or_else(|| config.encoder.spec.clone());
        Ctx {
            paths: ArtifactPaths::new(&out),
            seed,
            encoder_spec,
            jobs,
            config,
        }
    }

    fn encoder(&self) -> Result<Arc<dyn Encoder>> {
        Ok(EncoderHandle::parse(&self.encoder_spec)?.build()?)
    }

    fn load_corpus(&self) -> Result<Corpus> {
        let path = self.paths.corpus();
        if !path.exists() {
            bail!(
                "missing upstream artifact {}: run `ctt ingest` first",
                path.display()
            );
        }
        Ok(ingest_corpus(&path)?.corpus)
    }

    fn load_corpus_with_personas(&self) -> Result<Corpus> {
        let mut corpus = self.load_corpus()?;
        let personas = self.paths.personas();
        if !personas.exists() {
            bail!(
                "missing upstream artifact {}: run `ctt persona` first",
                personas.display()
            );
        }
        corpus.load_personas(&personas)?;
        Ok(corpus)
    }

    fn load_eval_sample(&self) -> Result<Vec<(String, Vec<String>)>> {
        let path = self.paths.eval_sample();
        if !path.exists() {
            bail!(
                "missing upstream artifact {}: run `ctt ingest` first",
                path.display()
            );
        }
        let content = std::fs::read_to_string(&path)?;
        let sample: Vec<EvalUser> = serde_json::from_str(&content)
            .with_context(|| format!("parsing {}", path.display()))?;
        Ok(sample.into_iter().map(|u| (u.user_id, u.reply_ids)).collect())
    }

    fn endpoint(&self) -> Result<&EndpointConfig> {
        self.config
            .endpoint
            .as_ref()
            .context("config has no [endpoint] section")
    }

    fn retry(&self) -> RetryPolicy {
        let max_retries = self
            .config
            .endpoint
            .as_ref()
            .map(|e| e.max_retries)
            .unwrap_or(3);
        RetryPolicy {
            max_retries,
            base_delay_ms: 250,
        }
    }

    fn topic_lexicon(&self) -> Result<TopicLexicon> {
        if self.config.topics.lexicon == "builtin-demo" {
            Ok(TopicLexicon::builtin_demo())
        } else {
            Ok(TopicLexicon::load(Path::new(&self.config.topics.lexicon))?)
        }
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct EvalUser {
    user_id: String,
    reply_ids: Vec<String>,
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let json = serde_json::to_string_pretty(value)?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

/// Map `f` over `items` with at most `jobs` worker threads, preserving
/// input order.
fn parallel_map<T, R, F>(items: Vec<T>, jobs: usize, f: F) -> Vec<R>
where
    T: Send + Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let n = items.len();
    let jobs = jobs.clamp(1, n.max(1));
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..n).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let r = f(&items[i]);
                results.lock().expect("results lock")[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("worker filled every slot"))
        .collect()
}

pub fn cmd_ingest(ctx: &Ctx) -> Result<()> {
    let report = ingest_corpus(&ctx.config.corpus.path).with_context(|| {
        format!("ingesting {}", ctx.config.corpus.path.display())
    })?;
    for warning in &report.warnings {
        log::warn!("{warning}");
    }
    let corpus = report.corpus;
    std::fs::create_dir_all(&ctx.paths.out)?;
    corpus.write_jsonl(&ctx.paths.corpus())?;

    let sample = ctt_core::corpus::sample_eval_users(
        &corpus,
        ctx.config.corpus.min_test_replies,
        ctx.config.corpus.per_user,
        ctx.config.corpus.max_users,
        ctx.seed,
    )?;
    let eval: Vec<EvalUser> = sample
        .into_iter()
        .map(|(user_id, reply_ids)| EvalUser { user_id, reply_ids })
        .collect();
    write_json(&ctx.paths.eval_sample(), &eval)?;

    let n_train = corpus
        .replies()
        .iter()
        .filter(|r| r.split == ctt_core::corpus::Split::Train)
        .count();
    let summary = serde_json::json!({
        "platform": corpus.platform().name(),
        "n_replies": corpus.replies().len(),
        "n_users": corpus.n_users(),
        "n_train": n_train,
        "n_test": corpus.replies().len() - n_train,
        "n_eval_users": eval.len(),
        "per_user": ctx.config.corpus.per_user,
        "warnings": report.warnings,
    });
    write_json(&ctx.paths.corpus_summary(), &summary)?;

    let mut lexicon_versions = LexiconSet::builtin().versions.clone();
    lexicon_versions.insert(
        "topics".to_string(),
        ctx.topic_lexicon()
            .map(|l| l.version)
            .unwrap_or_else(|_| "unavailable".to_string()),
    );
    let mut template_hashes = BTreeMap::new();
    template_hashes.insert("prompt".to_string(), template_hash());
    template_hashes.insert("persona".to_string(), persona_template_hash());
    let run_id = ctx
        .paths
        .out
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_else(|| "run".to_string());
    let dataset = ctx
        .config
        .run
        .dataset
        .clone()
        .unwrap_or_else(|| corpus.platform().name().to_string());
    let manifest = RunManifest::create(
        run_id,
        &ctx.paths.corpus(),
        dataset,
        lexicon_versions,
        ctx.encoder()?.name().to_string(),
        ctx.config.run.seeds.clone(),
        vec![ctx.config.generation.config.clone()],
        template_hashes,
    )?;
    manifest.save(&ctx.paths.manifest())?;

    log::info!(
        "ingested {} replies from {} users; {} evaluation users sampled",
        corpus.replies().len(),
        corpus.n_users(),
        eval.len()
    );
    Ok(())
}

pub fn cmd_persona(ctx: &Ctx) -> Result<()> {
    let mut corpus = ctx.load_corpus()?;
    let sample = ctx.load_eval_sample()?;
    let endpoint_cfg = ctx.config.persona.endpoint.as_ref().map_or_else(
        || ctx.endpoint().cloned(),
        |e| Ok(e.clone()),
    )?;
    let client: Arc<dyn ChatClient> = Arc::from(endpoint_cfg.client()?);
    let retry = ctx.retry();
    let sample_size = ctx.config.persona.sample_size;
    let seed = ctx.seed;

    let user_ids: Vec<String> = sample.into_iter().map(|(u, _)| u).collect();
    let jobs = ctx.jobs.min(client.max_concurrency());
    let corpus_ref = &corpus;
    let client_ref = client.as_ref();
    let results = parallel_map(user_ids.clone(), jobs, |user_id| {
        build_persona(corpus_ref, user_id, client_ref, sample_size, seed, &retry)
    });
    let mut n_ok = 0;
    for (user_id, result) in user_ids.iter().zip(results) {
        let persona =
            result.with_context(|| format!("persona synthesis failed for {user_id}"))?;
        corpus.set_persona(user_id, persona)?;
        n_ok += 1;
    }
    corpus.write_personas(&ctx.paths.personas())?;
    log::info!("synthesized {n_ok} personas via {}", client.model_name());
    Ok(())
}

pub fn cmd_generate(ctx: &Ctx) -> Result<()> {
    let kind = ctx.config.prompt_kind()?;
    let corpus = if kind == PromptKind::Bl {
        ctx.load_corpus()?
    } else {
        ctx.load_corpus_with_personas()?
    };
    let sample = ctx.load_eval_sample()?;
    let client: Arc<dyn ChatClient> = Arc::from(ctx.endpoint()?.client()?);
    let retry = ctx.retry();
    let prompt_config = PromptConfig {
        kind,
        n_style_examples: ctx.config.generation.n_style_examples,
        n_retrieved: ctx.config.generation.n_retrieved,
    };

    let index = if kind == PromptKind::PeSeCr {
        let users: Vec<String> = sample.iter().map(|(u, _)| u.clone()).collect();
        Some(RetrievalIndex::build(&corpus, &users, ctx.encoder()?)?)
    } else {
        None
    };

    let mut tasks: Vec<(String, String, String)> = Vec::new();
    for (user_id, reply_ids) in &sample {
        for reply_id in reply_ids {
            let reply = corpus
                .reply(reply_id)
                .with_context(|| format!("eval sample references unknown reply {reply_id}"))?;
            tasks.push((user_id.clone(), reply_id.clone(), reply.parent_text.clone()));
        }
    }

    let n = ctx.config.generation.n;
    let seed = ctx.seed;
    let jobs = ctx.jobs.min(client.max_concurrency());
    let corpus_ref = &corpus;
    let index_ref = index.as_ref();
    let client_ref = client.as_ref();
    let results = parallel_map(tasks, jobs, |(user_id, reply_id, parent_text)| {
        generate_for_message(
            client_ref,
            &prompt_config,
            corpus_ref,
            user_id,
            reply_id,
            parent_text,
            index_ref,
            n,
            seed,
            &retry,
        )
    });

    let mut sets = Vec::new();
    let mut log_lines = Vec::new();
    let mut incomplete = 0;
    for result in results {
        let (set, outcome) = result?;
        if !outcome.complete {
            incomplete += 1;
        }
        log_lines.push(serde_json::json!({
            "reply_id": set.reply_id,
            "user_id": set.user_id,
            "attempts": outcome.attempts,
            "complete": outcome.complete,
            "requests": outcome.requests,
        }));
        sets.push(set);
    }
    sets.sort_by(|a, b| (&a.user_id, &a.reply_id).cmp(&(&b.user_id, &b.reply_id)));

    let path = ctx
        .paths
        .candidates(client.model_name(), kind.as_str());
    std::fs::create_dir_all(ctx.paths.candidates_dir())?;
    write_candidate_sets(&path, &sets)?;
    let mut log_file = std::fs::File::create(ctx.paths.generation_log())?;
    for line in log_lines {
        writeln!(log_file, "{line}")?;
    }
    if incomplete > 0 {
        log::warn!("{incomplete} candidate sets are short of n={n}");
    }
    log::info!("wrote {} candidate sets to {}", sets.len(), path.display());
    Ok(())
}

/// The evaluated text for each candidate set under a selection mode:
/// candidate 0 by default, otherwise the outcome file's chosen candidate.
fn selected_texts(
    ctx: &Ctx,
    cell: &str,
    sets: &[CandidateSet],
    selection: SelectionMode,
) -> Result<Vec<(String, String, String)>> {
    let chosen: BTreeMap<String, usize> = match selection.outcome_strategy() {
        None => sets.iter().map(|s| (s.reply_id.clone(), 0usize)).collect(),
        Some(strategy) => {
            let path = ctx.paths.outcomes(cell, strategy);
            if !path.exists() {
                bail!(
                    "missing upstream artifact {}: run `ctt select` first",
                    path.display()
                );
            }
            read_outcomes(&path)?
                .into_iter()
                .map(|o| (o.reply_id, o.chosen_index))
                .collect()
        }
    };
    sets.iter()
        .map(|set| {
            let idx = *chosen.get(&set.reply_id).with_context(|| {
                format!("no selection outcome for reply {}", set.reply_id)
            })?;
            let text = set.candidates.get(idx).with_context(|| {
                format!(
                    "chosen index {idx} out of range for reply {} ({} candidates)",
                    set.reply_id,
                    set.candidates.len()
                )
            })?;
            Ok((set.reply_id.clone(), set.user_id.clone(), text.clone()))
        })
        .collect()
}

fn candidate_cells_or_bail(ctx: &Ctx) -> Result<Vec<String>> {
    let cells = ctx.paths.candidate_cells();
    if cells.is_empty() {
        bail!(
            "missing upstream artifacts in {}: run `ctt generate` first",
            ctx.paths.candidates_dir().display()
        );
    }
    Ok(cells)
}

pub fn cmd_detect(ctx: &Ctx, selection: SelectionMode) -> Result<()> {
    let corpus = ctx.load_corpus()?;
    let encoder = ctx.encoder()?;
    let pool: Vec<&Reply> = corpus.human_train_pool();
    let pipeline = FeaturePipeline::builtin();
    for cell in candidate_cells_or_bail(ctx)? {
        let sets = read_candidate_sets(&ctx.paths.candidates_cell(&cell))?;
        let selected = selected_texts(ctx, &cell, &sets, selection)?;
        let ai_texts: Vec<String> = selected.iter().map(|(_, _, t)| t.clone()).collect();
        let out_cell = format!("{cell}{}", selection.cell_suffix());

        let result = run_turing_test(
            &ai_texts,
            &pool,
            encoder.clone(),
            &ctx.config.run.seeds,
            ctx.config.detect.val_fraction,
            &TrainParams::default(),
        )?;
        write_json(&ctx.paths.detection(&out_cell), &result)?;

        let balanced = build_balanced_set(&ai_texts, &pool, ctx.seed)?;
        let mut features = Vec::with_capacity(balanced.len());
        let mut labels = Vec::with_capacity(balanced.len());
        for (text, label) in &balanced.items {
            features.push(pipeline.extract(text)?);
            labels.push(*label);
        }
        let (_, importance) = train_forest_detector(&features, &labels, 100, ctx.seed)?;
        write_json(&ctx.paths.importance_json(&out_cell), &importance)?;
        write_text(&ctx.paths.importance_csv(&out_cell), &importance.to_csv())?;

        log::info!(
            "{out_cell}: mean detection accuracy {:.4} over {} seeds",
            result.mean_accuracy,
            result.seeds.len()
        );
    }
    Ok(())
}

pub fn cmd_semsim(ctx: &Ctx, selection: SelectionMode) -> Result<()> {
    let corpus = ctx.load_corpus()?;
    let encoder = ctx.encoder()?;
    for cell in candidate_cells_or_bail(ctx)? {
        let sets = read_candidate_sets(&ctx.paths.candidates_cell(&cell))?;
        let selected = selected_texts(ctx, &cell, &sets, selection)?;
        let pairs: Vec<(String, String)> = selected
            .iter()
            .map(|(reply_id, _, text)| {
                let reference = corpus
                    .reply(reply_id)
                    .with_context(|| format!("unknown reference reply {reply_id}"))?;
                Ok((text.clone(), reference.text.clone()))
            })
            .collect::<Result<_>>()?;
        let dist = pairwise_similarity(&pairs, encoder.as_ref())?;
        let out_cell = format!("{cell}{}", selection.cell_suffix());
        write_text(&ctx.paths.semsim_scores(&out_cell), &dist.to_csv())?;
        write_json(&ctx.paths.semsim_summary(&out_cell), &dist.summary_json())?;
        log::info!(
            "{out_cell}: median similarity {:.4} over {} pairs",
            dist.median,
            dist.n
        );
    }
    Ok(())
}

pub fn cmd_topics(ctx: &Ctx, selection: SelectionMode) -> Result<()> {
    let corpus = ctx.load_corpus()?;
    let lexicon = ctx.topic_lexicon()?;
    let pool: Vec<String> = corpus
        .human_train_pool()
        .iter()
        .map(|r| r.text.clone())
        .collect();
    let mut by_model: BTreeMap<String, DivergenceReport> = BTreeMap::new();
    for cell in candidate_cells_or_bail(ctx)? {
        let sets = read_candidate_sets(&ctx.paths.candidates_cell(&cell))?;
        let selected = selected_texts(ctx, &cell, &sets, selection)?;
        let ai_texts: Vec<String> = selected.into_iter().map(|(_, _, t)| t).collect();
        let report = divergence_report(&ai_texts, &pool, &lexicon, ctx.config.topics.alpha)?;
        let out_cell = format!("{cell}{}", selection.cell_suffix());
        write_text(&ctx.paths.divergence_csv(&out_cell), &report.to_csv())?;
        write_json(&ctx.paths.divergence_json(&out_cell), &report)?;
        log::info!(
            "{out_cell}: {} of {} categories significantly divergent",
            report.significant_categories().len(),
            report.rows.len()
        );
        by_model.insert(cell_model(&cell), report);
    }
    let plot = divergence_plot_json(&by_model, ctx.config.topics.top_k);
    write_json(&ctx.paths.topics_common(), &plot)?;
    Ok(())
}

pub fn cmd_select(ctx: &Ctx) -> Result<()> {
    let corpus = ctx.load_corpus()?;
    let encoder = ctx.encoder()?;
    let pool: Vec<&Reply> = corpus.human_train_pool();
    let pipeline = FeaturePipeline::builtin();
    for cell in candidate_cells_or_bail(ctx)? {
        let sets = read_candidate_sets(&ctx.paths.candidates_cell(&cell))?;

        let cosine: Vec<SelectionOutcome> = sets
            .iter()
            .map(|set| {
                let reference = corpus
                    .reply(&set.reply_id)
                    .with_context(|| format!("unknown reference reply {}", set.reply_id))?;
                Ok(select_cosine_optimal(set, &reference.text, encoder.as_ref())?)
            })
            .collect::<Result<_>>()?;
        std::fs::create_dir_all(ctx.paths.select_dir())?;
        write_outcomes(&ctx.paths.outcomes(&cell, "cosine"), &cosine, None)?;

        let ml = select_ml_optimal(
            &sets,
            &pool,
            &pipeline,
            ctx.config.selection.n_folds,
            ctx.seed,
        )?;
        write_outcomes(
            &ctx.paths.outcomes(&cell, "ml"),
            &ml.outcomes,
            Some(&ml.feature_schema),
        )?;
        if !ml.audit.leak_free() {
            bail!("fold audit found a same-user train/score leak in {cell}");
        }

        let overlap = overlap_rate(&cosine, &ml.outcomes)?;
        write_json(
            &ctx.paths.overlap(&cell),
            &serde_json::json!({
                "n_sets": sets.len(),
                "overlap_cosine_ml": round_sig(overlap),
                "n_folds": ctx.config.selection.n_folds,
                "feature_schema": ml.feature_schema,
                "fold_audit": ml.audit,
            }),
        )?;
        log::info!("{cell}: cosine/ml overlap {overlap:.4} over {} sets", sets.len());
    }
    Ok(())
}

fn cell_model(cell: &str) -> String {
    cell.split("__").next().unwrap_or(cell).to_string()
}

fn cell_config(cell: &str) -> String {
    cell.split("__").nth(1).unwrap_or("").to_string()
}

fn stems_in(dir: &Path, suffix: &str) -> Vec<String> {
    let mut stems = Vec::new();
    if let Ok(entries) = std::fs::read_dir(dir) {
        for entry in entries.flatten() {
            let name = entry.file_name().to_string_lossy().to_string();
            if let Some(stem) = name.strip_suffix(suffix) {
                stems.push(stem.to_string());
            }
        }
    }
    stems.sort();
    stems
}

pub fn cmd_report(ctx: &Ctx) -> Result<()> {
    let manifest_path = ctx.paths.manifest();
    if !manifest_path.exists() {
        bail!(
            "missing upstream artifact {}: run `ctt ingest` first",
            manifest_path.display()
        );
    }
    let manifest = RunManifest::load(&manifest_path)?;
    if sha256_file(&ctx.paths.corpus())? != manifest.corpus_sha256 {
        log::warn!("corpus.jsonl hash no longer matches the manifest; artifacts may be stale");
    }

    // Every cell any stage produced, plus every candidates cell.
    let mut cells: Vec<String> = ctx.paths.candidate_cells();
    for stem in stems_in(&ctx.paths.detect_dir(), ".json") {
        if let Some(stripped) = stem.strip_suffix("__importance") {
            if !cells.contains(&stripped.to_string()) {
                cells.push(stripped.to_string());
            }
        } else if !cells.contains(&stem) {
            cells.push(stem.clone());
        }
    }
    for stem in stems_in(&ctx.paths.semsim_dir(), "__summary.json") {
        if !cells.contains(&stem) {
            cells.push(stem.clone());
        }
    }
    cells.sort();
    if cells.is_empty() {
        bail!(
            "no artifacts to report in {}: run the pipeline first",
            ctx.paths.out.display()
        );
    }

    let mut detection = BTreeMap::new();
    let mut similarity = BTreeMap::new();
    let mut importances = BTreeMap::new();
    let mut divergence = BTreeMap::new();
    let mut selection = BTreeMap::new();
    for cell in &cells {
        let detect_path = ctx.paths.detection(cell);
        detection.insert(
            cell.clone(),
            if detect_path.exists() {
                let result: ctt_core::detector::DetectionResult =
                    serde_json::from_str(&std::fs::read_to_string(&detect_path)?)?;
                Cell::present(DetectionCell::from(&result))
            } else {
                Cell::missing(format!("artifact {} not found", rel(ctx, &detect_path)))
            },
        );

        let scores_path = ctx.paths.semsim_scores(cell);
        similarity.insert(
            cell.clone(),
            if scores_path.exists() {
                // Recompute the quartiles from the raw score file so bundle
                // numbers always have raw backing; the zero-vector count
                // comes from the stage's summary artifact.
                let scores = read_scores_csv(&scores_path)?;
                let n_zero = read_zero_pair_count(&ctx.paths.semsim_summary(cell))?;
                let dist =
                    ctt_core::semsim::SimilarityDistribution::from_scores(scores, vec![]);
                let mut cell_value = SimilarityCell::from(&dist);
                cell_value.n_zero_vector_pairs = n_zero;
                Cell::present(cell_value)
            } else {
                Cell::missing(format!("artifact {} not found", rel(ctx, &scores_path)))
            },
        );

        let imp_path = ctx.paths.importance_json(cell);
        importances.insert(
            cell.clone(),
            if imp_path.exists() {
                let report: ctt_core::detector::FeatureImportanceReport =
                    serde_json::from_str(&std::fs::read_to_string(&imp_path)?)?;
                Cell::present(ImportanceCell::from(&report))
            } else {
                Cell::missing(format!("artifact {} not found", rel(ctx, &imp_path)))
            },
        );

        let div_path = ctx.paths.divergence_json(cell);
        divergence.insert(
            cell.clone(),
            if div_path.exists() {
                let report: DivergenceReport =
                    serde_json::from_str(&std::fs::read_to_string(&div_path)?)?;
                Cell::present(DivergenceCell::from(&report))
            } else {
                Cell::missing(format!("artifact {} not found", rel(ctx, &div_path)))
            },
        );

        let overlap_path = ctx.paths.overlap(cell);
        selection.insert(
            cell.clone(),
            if overlap_path.exists() {
                let value: serde_json::Value =
                    serde_json::from_str(&std::fs::read_to_string(&overlap_path)?)?;
                Cell::present(SelectionCell {
                    n_sets: value["n_sets"].as_u64().unwrap_or(0) as usize,
                    overlap_cosine_ml: value["overlap_cosine_ml"].as_f64().unwrap_or(f64::NAN),
                    feature_schema: value["feature_schema"]
                        .as_array()
                        .map(|a| {
                            a.iter()
                                .filter_map(|v| v.as_str().map(String::from))
                                .collect()
                        })
                        .unwrap_or_default(),
                })
            } else {
                Cell::missing(format!("artifact {} not found", rel(ctx, &overlap_path)))
            },
        );
    }

    // Stepwise deltas per model over whatever ladder rungs are present.
    let mut by_model: BTreeMap<String, BTreeMap<PromptKind, f64>> = BTreeMap::new();
    for (cell, result) in &detection {
        if let (Some(kind), Some(value)) =
            (PromptKind::parse(&cell_config(cell)), result.value())
        {
            by_model
                .entry(cell_model(cell))
                .or_default()
                .insert(kind, value.mean_accuracy);
        }
    }
    let mut stepwise: BTreeMap<String, Vec<StepDelta>> = BTreeMap::new();
    for (model, results) in &by_model {
        match emit_stepwise_deltas(results) {
            Ok(deltas) => {
                stepwise.insert(model.clone(), deltas);
            }
            Err(ReportError::NonAdjacentConfigs(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }

    let bundle = ReportBundle {
        manifest,
        detection,
        similarity,
        importances,
        divergence,
        selection,
        stepwise_deltas: stepwise,
        stepwise_legend: STEPWISE_LEGEND.to_string(),
    };
    std::fs::create_dir_all(ctx.paths.report_dir())?;
    write_text(&ctx.paths.bundle(), &bundle.to_pretty_json())?;
    write_text(
        &ctx.paths.stepwise_csv(),
        &ctt_core::report::stepwise_deltas_csv(&bundle.stepwise_deltas),
    )?;

    let missing = bundle.missing_cells();
    for cell in &missing {
        log::warn!("report cell missing: {cell}");
    }
    log::info!(
        "bundle written to {} ({} cells, {} missing)",
        ctx.paths.bundle().display(),
        cells.len(),
        missing.len()
    );
    Ok(())
}

fn rel(ctx: &Ctx, path: &Path) -> String {
    path.strip_prefix(&ctx.paths.out)
        .unwrap_or(path)
        .display()
        .to_string()
}

fn read_zero_pair_count(summary_path: &Path) -> Result<usize> {
    if !summary_path.exists() {
        return Ok(0);
    }
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(summary_path)?)?;
    Ok(value["n_zero_vector_pairs"].as_u64().unwrap_or(0) as usize)
}

fn read_scores_csv(path: &Path) -> Result<Vec<f64>> {
    let content = std::fs::read_to_string(path)?;
    let mut scores = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let score = line
            .rsplit(',')
            .next()
            .context("empty score row")?
            .trim()
            .parse::<f64>()
            .with_context(|| format!("bad score at {path:?} line {}", i + 1))?;
        scores.push(score);
    }
    Ok(scores)
}
