//! Command-line front end. Every subcommand is a thin delegator into the
//! library; no domain logic lives here.
//!
//! Exit codes: 0 on success, 1 on domain errors, 2 on usage errors. Every
//! successful run produces a machine-readable report carrying the resolved
//! configuration digest; pass `--report PATH` to write it (`synthesize`
//! writes one next to its output by default).

mod setup;

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use counselkit::corpus::{
    self, build_transcript, load_cases, load_dialogues, load_personas, load_ratings,
    load_single_turns, load_topic_registry, save_cases, save_dialogues, save_personas,
    save_single_turns, CorpusKind, CounselingCase, JsonMap, LinguisticStyleProfile, Role,
    TherapyTechniqueEntry, TopicId,
};
use counselkit::dataset;
use counselkit::eval::{self, EvalPair, ItemVotes, JudgeDimension, PairTokenizer};
use counselkit::persona;
use counselkit::provider::{ChatMessage, ChatProvider, ChatRequest, HttpProvider};
use counselkit::style::{self, TechniqueKB};
use counselkit::synth::{self, SynthesisConfig};

use setup::{build_embedder, digest_of, GlobalArgs, RunReportFile};

#[derive(Parser)]
#[command(
    name = "counselkit",
    about = "Synthesize counselor-style multi-turn counseling dialogues and evaluate them",
    version
)]
struct Cli {
    #[command(flatten)]
    globals: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize linguistic style and classify therapy technique per case.
    ExtractStyle {
        /// Counseling-case collection (JSON).
        #[arg(long)]
        cases: PathBuf,
        /// Technique knowledge base (JSON); defaults to the built-in KB.
        #[arg(long)]
        kb: Option<PathBuf>,
        /// Output resources file: {"styles": .., "techniques": ..}.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Simulate Big Five personality profiles for every seed dialogue.
    SimulatePersona {
        /// Single-turn seed collection (JSON).
        #[arg(long)]
        seeds: PathBuf,
        /// Output personas file keyed by seed id.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Keep seeds whose personality-richness score meets the threshold.
    Filter {
        #[arg(long)]
        seeds: PathBuf,
        /// Pre-computed scores file (JSON map id -> integer). When absent,
        /// scores are computed through the provider.
        #[arg(long)]
        scores: Option<PathBuf>,
        /// Write computed scores here.
        #[arg(long)]
        scores_out: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        threshold: u8,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Synthesize multi-turn dialogues from single-turn seeds.
    Synthesize {
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long)]
        cases: PathBuf,
        #[arg(long)]
        kb: Option<PathBuf>,
        /// Pre-simulated personas file; missing personas are simulated.
        #[arg(long)]
        personas: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Abort the run on the first per-seed failure.
        #[arg(long)]
        fail_fast: bool,
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
        /// Synthesis attempts per seed.
        #[arg(long, default_value_t = 3)]
        retry_budget: u32,
        /// Pin a template version (default: newest available).
        #[arg(long)]
        template_version: Option<String>,
        /// Desired-turn-range hint rendered into the prompt.
        #[arg(long, default_value = "16 to 24")]
        turn_range_hint: String,
    },
    /// Structurally validate a collection file.
    Validate {
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        /// single_turn | case | multi_turn | mift | ratings
        #[arg(long)]
        kind: CorpusKind,
        /// Topic registry; when given, every record topic must resolve.
        #[arg(long)]
        topics: Option<PathBuf>,
    },
    /// Corpus statistics (turn counts, utterance lengths).
    Stats {
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        /// Print the report as JSON instead of plain lines.
        #[arg(long)]
        json: bool,
    },
    /// Stratified train/test split with a fixed per-topic test count.
    Split {
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long, default_value_t = 20)]
        per_topic_test: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
    },
    /// Export instruction-tuning samples (one per counselor turn) as JSONL.
    ExportMift {
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// File whose text is attached as the fixed system prompt.
        #[arg(long)]
        system_prompt: Option<PathBuf>,
    },
    /// Automatic metrics over (generated, reference) pairs.
    EvalAuto {
        /// Pairs file: [{"generated", "reference", ...}].
        #[arg(long)]
        pairs: PathBuf,
        /// cjk_char | whitespace | provided
        #[arg(long, default_value = "cjk_char")]
        tokenizer: PairTokenizer,
        /// mock | endpoint
        #[arg(long, default_value = "mock")]
        embedder: String,
        /// Also write the table-style CSV here (values ×100, 2 decimals).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Score a subject on one dimension with one or more LLM judges.
    EvalJudge {
        #[arg(long)]
        dimension: JudgeDimension,
        /// Text file holding the material to judge.
        #[arg(long)]
        subject: PathBuf,
        /// Comma-separated provider config files, one per judge.
        #[arg(long, value_delimiter = ',')]
        judges: Vec<PathBuf>,
        /// Number of judges when judging through --mock or --config.
        #[arg(long, default_value_t = 2)]
        judge_count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Fleiss' kappa over a ratings matrix.
    Kappa {
        #[arg(long)]
        ratings: PathBuf,
    },
    /// Majority vote with tie handling and reference agreement.
    Vote {
        /// Choices file: [{"item", "votes": {rater: choice}, "reference"}].
        #[arg(long)]
        choices: PathBuf,
    },
    /// Interactive counseling chat against the configured provider.
    Chat {
        /// Resources file produced by extract-style.
        #[arg(long)]
        styles: PathBuf,
        #[arg(long)]
        topic: String,
        /// Where the transcript is saved on exit.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap exits 0 for --help/--version and 2 for usage errors.
        Err(err) => err.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

/// Prints a line to stdout. A consumer closing the pipe (`| head`) ends the
/// process quietly instead of panicking.
fn emit(line: std::fmt::Arguments<'_>) {
    let mut stdout = std::io::stdout();
    let outcome = stdout
        .write_fmt(line)
        .and_then(|()| stdout.write_all(b"\n"));
    if let Err(err) = outcome {
        if err.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {err}");
        std::process::exit(1);
    }
}

macro_rules! outln {
    ($($arg:tt)*) => { emit(format_args!($($arg)*)) };
}

fn run(cli: Cli) -> Result<()> {
    let globals = &cli.globals;
    let (report, default_path) = execute(globals, cli.command)?;
    report.write_to(globals.report.as_deref(), default_path.as_deref())?;
    Ok(())
}

fn load_kb(path: Option<&Path>) -> Result<TechniqueKB> {
    Ok(match path {
        Some(path) => TechniqueKB::load(path)?,
        None => TechniqueKB::builtin().clone(),
    })
}

/// Resources file schema shared by extract-style, synthesize, and chat.
#[derive(serde::Serialize, serde::Deserialize)]
struct ResourcesFile {
    styles: BTreeMap<TopicId, LinguisticStyleProfile>,
    techniques: BTreeMap<TopicId, TherapyTechniqueEntry>,
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Runs one subcommand and returns its run report plus an optional default
/// report path (used by synthesize when `--report` is absent).
fn execute(globals: &GlobalArgs, command: Command) -> Result<(RunReportFile, Option<PathBuf>)> {
    match command {
        Command::ExtractStyle {
            cases,
            kb,
            out,
            seed,
        } => {
            let cases = load_cases(&cases)?;
            let kb = load_kb(kb.as_deref())?;
            let provider = globals.build_provider()?;
            let templates = globals.template_store();
            let resources = style::extract_all(&cases, provider.as_ref(), &kb, &templates, seed)?;
            let file = ResourcesFile {
                styles: resources.styles,
                techniques: resources.techniques,
            };
            write_json(&file, &out)?;
            outln!("extracted {} style profiles", file.styles.len());

            let digest = digest_of(&serde_json::json!({
                "command": "extract-style", "seed": seed,
            }))?;
            let report = RunReportFile::ok("extract-style", digest)
                .with_output(&out)
                .with_details(serde_json::json!({ "styles": file.styles.len() }));
            Ok((report, None))
        }

        Command::SimulatePersona { seeds, out, seed } => {
            let seeds = load_single_turns(&seeds)?;
            let provider = globals.build_provider()?;
            let templates = globals.template_store();
            let mut personas = BTreeMap::new();
            for seed_dialogue in &seeds {
                let per_seed = synth::per_seed_rng(seed, &seed_dialogue.id);
                let record = persona::simulate_personality(
                    seed_dialogue,
                    provider.as_ref(),
                    &templates,
                    per_seed,
                    2,
                )
                .with_context(|| format!("seed `{}`", seed_dialogue.id))?;
                personas.insert(seed_dialogue.id.clone(), record.profile);
            }
            save_personas(&personas, &out)?;
            outln!("simulated {} personas", personas.len());

            let digest = digest_of(&serde_json::json!({
                "command": "simulate-persona", "seed": seed,
            }))?;
            let report = RunReportFile::ok("simulate-persona", digest)
                .with_output(&out)
                .with_details(serde_json::json!({ "personas": personas.len() }));
            Ok((report, None))
        }

        Command::Filter {
            seeds,
            scores,
            scores_out,
            out,
            threshold,
            seed,
        } => {
            let seed_dialogues = load_single_turns(&seeds)?;
            let score_map: BTreeMap<String, u8> = match scores {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("cannot read {}", path.display()))?;
                    serde_json::from_str(&text)
                        .with_context(|| format!("invalid scores file {}", path.display()))?
                }
                None => {
                    let provider = globals.build_provider()?;
                    let templates = globals.template_store();
                    let mut computed = BTreeMap::new();
                    for seed_dialogue in &seed_dialogues {
                        let per_seed = synth::per_seed_rng(seed, &seed_dialogue.id);
                        let score = persona::score_personality_richness(
                            seed_dialogue,
                            provider.as_ref(),
                            &templates,
                            per_seed,
                        )
                        .with_context(|| format!("seed `{}`", seed_dialogue.id))?;
                        computed.insert(seed_dialogue.id.clone(), score);
                    }
                    computed
                }
            };
            if let Some(path) = &scores_out {
                write_json(&score_map, path)?;
            }
            let total = seed_dialogues.len();
            let kept = dataset::filter_by_richness(seed_dialogues, &score_map, threshold)?;
            save_single_turns(&kept, &out)?;
            outln!(
                "kept {} of {total} seeds at threshold {threshold}",
                kept.len()
            );

            let digest = digest_of(&serde_json::json!({
                "command": "filter", "threshold": threshold, "seed": seed,
            }))?;
            let report = RunReportFile::ok("filter", digest)
                .with_output(&out)
                .with_details(serde_json::json!({ "kept": kept.len(), "total": total }));
            Ok((report, None))
        }

        Command::Synthesize {
            seeds,
            cases,
            kb,
            personas,
            out,
            seed,
            fail_fast,
            concurrency,
            retry_budget,
            template_version,
            turn_range_hint,
        } => {
            let seed_dialogues = load_single_turns(&seeds)?;
            let case_list = load_cases(&cases)?;
            let kb = load_kb(kb.as_deref())?;
            let persona_map = match &personas {
                Some(path) => load_personas(path)?,
                None => BTreeMap::new(),
            };
            let provider = globals.build_provider()?;
            let templates = globals.template_store();
            let config = SynthesisConfig {
                global_seed: seed,
                fail_fast,
                concurrency,
                retry_budget,
                template_version,
                turn_range_hint,
                ..SynthesisConfig::default()
            };
            let output = synth::run_pipeline(
                &seed_dialogues,
                &case_list,
                &kb,
                &persona_map,
                provider,
                &templates,
                &config,
            )?;
            save_dialogues(&output.dialogues, &out)?;
            let failed = output.report.per_seed.len() - output.dialogues.len();
            outln!(
                "synthesized {} dialogues ({failed} failed) from {} seeds",
                output.dialogues.len(),
                output.report.per_seed.len()
            );

            let report = RunReportFile::ok("synthesize", output.report.config_digest.clone())
                .with_output(&out)
                .with_details(serde_json::to_value(&output.report)?);
            Ok((report, Some(out.with_extension("report.json"))))
        }

        Command::Validate { r#in, kind, topics } => {
            let collection = corpus::load_corpus(&r#in, kind)?;
            if let Some(topics_path) = topics {
                let registry = load_topic_registry(&topics_path)?;
                let record_topics: Vec<TopicId> = match &collection {
                    corpus::Collection::SingleTurn(v) => {
                        v.iter().map(|d| d.topic.clone()).collect()
                    }
                    corpus::Collection::Cases(v) => v.iter().map(|c| c.topic.clone()).collect(),
                    corpus::Collection::MultiTurn(v) => v.iter().map(|d| d.topic.clone()).collect(),
                    corpus::Collection::Mift(_) | corpus::Collection::Ratings(_) => Vec::new(),
                };
                registry.check_closure(record_topics.iter())?;
            }
            outln!("valid: {} records", collection.len());

            let digest = digest_of(&serde_json::json!({
                "command": "validate", "kind": kind.to_string(),
            }))?;
            let report = RunReportFile::ok("validate", digest)
                .with_details(serde_json::json!({ "records": collection.len() }));
            Ok((report, None))
        }

        Command::Stats { r#in, json } => {
            let corpus = load_dialogues(&r#in)?;
            let stats = dataset::compute_stats(&corpus);
            if json {
                outln!("{}", serde_json::to_string_pretty(&stats)?);
            } else {
                outln!("size {}", stats.size);
                outln!("not_avg {:?}", stats.not_avg);
                outln!("loc_avg {:?}", stats.loc_avg);
                outln!("lop_avg {:?}", stats.lop_avg);
            }

            let digest = digest_of(&serde_json::json!({ "command": "stats" }))?;
            let report =
                RunReportFile::ok("stats", digest).with_details(serde_json::to_value(stats)?);
            Ok((report, None))
        }

        Command::Split {
            r#in,
            per_topic_test,
            seed,
            train_out,
            test_out,
        } => {
            let corpus = load_dialogues(&r#in)?;
            let split = dataset::split_dataset(&corpus, per_topic_test, seed)?;
            save_dialogues(&split.train, &train_out)?;
            save_dialogues(&split.test, &test_out)?;
            outln!("train {} / test {}", split.train.len(), split.test.len());

            let digest = digest_of(&serde_json::json!({
                "command": "split", "per_topic_test": per_topic_test, "seed": seed,
            }))?;
            let report = RunReportFile::ok("split", digest)
                .with_output(&train_out)
                .with_output(&test_out)
                .with_details(serde_json::json!({
                    "train": split.train.len(), "test": split.test.len(),
                }));
            Ok((report, None))
        }

        Command::ExportMift {
            r#in,
            out,
            system_prompt,
        } => {
            let corpus = load_dialogues(&r#in)?;
            let system_text = match &system_prompt {
                Some(path) => Some(
                    std::fs::read_to_string(path)
                        .with_context(|| format!("cannot read {}", path.display()))?
                        .trim_end()
                        .to_string(),
                ),
                None => None,
            };
            let count = dataset::export_mift_corpus(&corpus, &out, system_text.as_deref())?;
            outln!("exported {count} samples");

            let digest = digest_of(&serde_json::json!({
                "command": "export-mift", "system_prompt": system_text.is_some(),
            }))?;
            let report = RunReportFile::ok("export-mift", digest)
                .with_output(&out)
                .with_details(serde_json::json!({ "samples": count }));
            Ok((report, None))
        }

        Command::EvalAuto {
            pairs,
            tokenizer,
            embedder,
            csv,
        } => {
            let text = std::fs::read_to_string(&pairs)
                .with_context(|| format!("cannot read {}", pairs.display()))?;
            let pair_list: Vec<EvalPair> = serde_json::from_str(&text)
                .with_context(|| format!("invalid pairs file {}", pairs.display()))?;
            let embedder_impl = build_embedder(&embedder, globals)?;
            let metric_report =
                eval::evaluate_model_outputs(&pair_list, tokenizer, embedder_impl.as_ref())?;
            outln!("{}", serde_json::to_string_pretty(&metric_report)?);
            if let Some(path) = &csv {
                std::fs::write(path, metric_report.to_csv())
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }

            let digest = digest_of(&serde_json::json!({
                "command": "eval-auto", "tokenizer": format!("{tokenizer:?}"),
                "embedder": embedder,
            }))?;
            let mut report = RunReportFile::ok("eval-auto", digest)
                .with_details(serde_json::to_value(metric_report)?);
            if let Some(path) = &csv {
                report = report.with_output(path);
            }
            Ok((report, None))
        }

        Command::EvalJudge {
            dimension,
            subject,
            judges,
            judge_count,
            seed,
        } => {
            let subject_text = std::fs::read_to_string(&subject)
                .with_context(|| format!("cannot read {}", subject.display()))?;
            let judge_providers: Vec<Arc<dyn ChatProvider>> = if judges.is_empty() {
                let provider = globals.build_provider()?;
                (0..judge_count.max(1))
                    .map(|_| Arc::clone(&provider))
                    .collect()
            } else {
                judges
                    .iter()
                    .map(|path| -> Result<Arc<dyn ChatProvider>> {
                        let text = std::fs::read_to_string(path)
                            .with_context(|| format!("cannot read {}", path.display()))?;
                        let config = serde_json::from_str(&text)
                            .with_context(|| format!("invalid judge config {}", path.display()))?;
                        Ok(Arc::new(HttpProvider::from_config(config)?))
                    })
                    .collect::<Result<_>>()?
            };
            let templates = globals.template_store();
            let verdict =
                eval::judge_score(&subject_text, dimension, &judge_providers, &templates, seed)?;
            outln!("{}", serde_json::to_string_pretty(&verdict)?);

            let digest = digest_of(&serde_json::json!({
                "command": "eval-judge", "dimension": dimension.key(),
                "judges": judge_providers.len(), "seed": seed,
            }))?;
            let report = RunReportFile::ok("eval-judge", digest)
                .with_details(serde_json::to_value(verdict)?);
            Ok((report, None))
        }

        Command::Kappa { ratings } => {
            let matrix = load_ratings(&ratings)?;
            let kappa = eval::fleiss_kappa(&matrix)?;
            outln!("kappa {kappa:.6}");

            let digest = digest_of(&serde_json::json!({ "command": "kappa" }))?;
            let report = RunReportFile::ok("kappa", digest)
                .with_details(serde_json::json!({ "kappa": kappa }));
            Ok((report, None))
        }

        Command::Vote { choices } => {
            let text = std::fs::read_to_string(&choices)
                .with_context(|| format!("cannot read {}", choices.display()))?;
            let items: Vec<ItemVotes> = serde_json::from_str(&text)
                .with_context(|| format!("invalid choices file {}", choices.display()))?;
            let outcome = eval::majority_vote(&items)?;
            outln!("{}", serde_json::to_string_pretty(&outcome)?);

            let digest = digest_of(&serde_json::json!({ "command": "vote" }))?;
            let report =
                RunReportFile::ok("vote", digest).with_details(serde_json::to_value(outcome)?);
            Ok((report, None))
        }

        Command::Chat {
            styles,
            topic,
            out,
            seed,
        } => {
            let utterances = chat_session(globals, &styles, &topic, &out, seed)?;
            let digest = digest_of(&serde_json::json!({
                "command": "chat", "topic": topic, "seed": seed,
            }))?;
            let report = RunReportFile::ok("chat", digest)
                .with_output(&out)
                .with_details(serde_json::json!({ "utterances": utterances }));
            Ok((report, None))
        }
    }
}

/// Runs the interactive loop and returns the saved utterance count.
fn chat_session(
    globals: &GlobalArgs,
    styles_path: &Path,
    topic_raw: &str,
    out: &Path,
    seed: u64,
) -> Result<usize> {
    let text = std::fs::read_to_string(styles_path)
        .with_context(|| format!("cannot read {}", styles_path.display()))?;
    let resources: ResourcesFile = serde_json::from_str(&text)
        .with_context(|| format!("invalid resources file {}", styles_path.display()))?;
    let style = synth::match_style(topic_raw, &resources.styles)?;
    let technique = synth::match_technique(topic_raw, &resources.techniques)?;
    let topic = TopicId::new(topic_raw).map_err(|_| anyhow::anyhow!("empty topic"))?;

    let provider = globals.build_provider()?;
    let templates = globals.template_store();
    let template = templates.load("chat_system", None)?;
    let mut slots = BTreeMap::new();
    slots.insert("linguistic_style".to_string(), style.summary.clone());
    slots.insert(
        "therapy_technique".to_string(),
        format!(
            "{}: {}",
            technique.therapeutic_type.name, technique.description
        ),
    );
    let system_prompt = template.render(&slots)?.text;

    let stdin = std::io::stdin();
    let mut transcript: Vec<(Role, String)> = Vec::new();
    let mut session_error: Option<anyhow::Error> = None;

    eprintln!("chat session started; empty line re-prompts, `exit` ends the session");
    loop {
        eprint!("you> ");
        std::io::stderr().flush().ok();
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break; // EOF
        }
        let line = line.trim();
        if line.is_empty() {
            continue; // re-prompt without a provider call
        }
        if line == "exit" || line == "quit" {
            break;
        }

        let mut messages = vec![ChatMessage::system(system_prompt.clone())];
        for (role, content) in &transcript {
            messages.push(match role {
                Role::Client => ChatMessage::user(content.clone()),
                Role::Counselor => ChatMessage::assistant(content.clone()),
            });
        }
        messages.push(ChatMessage::user(line.to_string()));
        transcript.push((Role::Client, line.to_string()));

        let request = ChatRequest::new(messages, Default::default(), "chat", seed)?;
        match provider.complete_chat(&request) {
            Ok(response) => {
                outln!("counselor> {}", response.text);
                transcript.push((Role::Counselor, response.text));
            }
            Err(err) => {
                session_error = Some(err.into());
                break;
            }
        }
    }

    // Save whatever the session produced, even after a provider error; a
    // single-utterance transcript is below the schema minimum and skipped.
    let saved = transcript.len();
    if saved >= 2 {
        let case = CounselingCase {
            id: "chat-session".to_string(),
            topic,
            transcript: build_transcript(transcript),
            sanitized: false,
            extra: JsonMap::new(),
        };
        save_cases(std::slice::from_ref(&case), out)?;
        eprintln!("transcript saved to {}", out.display());
    } else {
        eprintln!("transcript too short to save (minimum 2 utterances)");
    }

    match session_error {
        Some(err) => Err(err.context("provider failed mid-session; partial transcript saved")),
        None => Ok(saved),
    }
}
