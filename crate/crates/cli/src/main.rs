//! Command-line surface for the hiertable engine.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use hiertable::eval::{execution_accuracy, spurious_rate, EvalDataset, Prediction};
use hiertable::formula::{eval_formula, extract_alignment, parse_formula};
use hiertable::ingest::{admit_table, load_samples, load_table, save_table, Sample};
use hiertable::interp::execute;
use hiertable::linearize::{flatten_for_export, linearize_table, serialize_for_nlg};
use hiertable::program::parse_program;
use hiertable::search::{
    search_sample_record, search_stats, SampleSearchRecord, SearchConfig, SearchMode,
};
use hiertable::table::HierTable;

#[derive(Parser)]
#[command(
    name = "hiertable",
    version,
    about = "Reasoning over hierarchical tables"
)]
struct Cli {
    /// key=value overrides, one per line
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// worker threads for per-sample work
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate table files and report admission decisions
    Ingest {
        /// table JSON files or directories of them
        #[arg(long, required = true, num_args = 1.., value_name = "PATH")]
        tables: Vec<PathBuf>,
    },
    /// Emit the extracted header trees of a table as JSON
    Extract {
        #[arg(long, value_name = "FILE")]
        table: PathBuf,
    },
    /// Execute a program against a table and print the result as JSON
    Exec {
        #[arg(long, value_name = "FILE")]
        table: PathBuf,
        #[arg(long, value_name = "PROGRAM")]
        program: String,
    },
    /// Search samples for denotation-consistent programs
    Search {
        #[command(flatten)]
        data: DataArgs,
        /// weak or partial supervision
        #[arg(long, value_name = "MODE")]
        mode: Option<String>,
        /// programs drawn per sample
        #[arg(long, value_name = "N")]
        budget: Option<usize>,
        #[arg(long, value_name = "S")]
        seed: Option<u64>,
        #[arg(long, value_name = "N")]
        max_funcs: Option<usize>,
        /// allow order-relation operators
        #[arg(long)]
        activate_order_relations: bool,
        /// allow rank arguments greater than one
        #[arg(long)]
        activate_k_gt_1: bool,
        /// write JSONL here instead of stdout
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Score predictions against gold answers
    Eval {
        #[arg(long, required = true, num_args = 1.., value_name = "PATH")]
        tables: Vec<PathBuf>,
        /// gold samples JSONL
        #[arg(long, value_name = "FILE")]
        gold: PathBuf,
        /// predictions JSONL ({sample_id, program} or {sample_id, answer})
        #[arg(long, value_name = "FILE")]
        predictions: PathBuf,
        /// gold programs JSONL for the spurious-rate report
        #[arg(long, value_name = "FILE")]
        gold_programs: Option<PathBuf>,
    },
    /// Print the level-order header linearization, one line per table
    Linearize {
        #[arg(long, required = true, num_args = 1.., value_name = "PATH")]
        tables: Vec<PathBuf>,
    },
    /// Serialize highlighted sub-tables for generation, one line per sample
    NlgSerialize {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Print the unmerged flat grid of a table as JSON
    Flatten {
        #[arg(long, value_name = "FILE")]
        table: PathBuf,
    },
    /// Aggregate statistics over a search output file
    Stats {
        #[arg(long, value_name = "FILE")]
        search_output: PathBuf,
    },
}

#[derive(Args)]
struct DataArgs {
    /// table JSON files or directories of them
    #[arg(long, required = true, num_args = 1.., value_name = "PATH")]
    tables: Vec<PathBuf>,
    /// samples JSONL
    #[arg(long, value_name = "FILE")]
    samples: PathBuf,
}

struct Failure {
    code: i32,
    error: anyhow::Error,
}

fn data_err(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap reports --help/--version through the error path
            if e.use_stderr() {
                eprintln!("{e}");
                std::process::exit(1);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            std::process::exit(3);
        }
    }
    let config = match cli.config.as_deref().map(read_config).transpose() {
        Ok(map) => map.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    };
    match run(cli.command, &config) {
        Ok(()) => {}
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            std::process::exit(f.code);
        }
    }
}

fn read_config(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), i + 1))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn run(command: Command, config: &BTreeMap<String, String>) -> Result<(), Failure> {
    match command {
        Command::Ingest { tables } => ingest(&tables),
        Command::Extract { table } => {
            let t = read_table(&table)?;
            let doc = save_table(&t);
            let out = serde_json::json!({
                "table_id": doc.table_id,
                "left_tree": doc.left_tree,
                "top_tree": doc.top_tree,
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(())
        }
        Command::Exec { table, program } => {
            let t = read_table(&table)?;
            let p = parse_program(&program).map_err(|e| data_err(anyhow!(e)))?;
            let value = execute(&p, &t).map_err(|e| data_err(anyhow!(e)))?;
            println!("{}", serde_json::to_string(&value.to_json(&t)).unwrap());
            Ok(())
        }
        Command::Search {
            data,
            mode,
            budget,
            seed,
            max_funcs,
            activate_order_relations,
            activate_k_gt_1,
            output,
        } => {
            let mut search = SearchConfig::default();
            apply_config(&mut search, config).map_err(data_err)?;
            if let Some(budget) = budget {
                search.max_samples_per_item = budget;
            }
            if let Some(seed) = seed {
                search.seed = seed;
            }
            if let Some(max_funcs) = max_funcs {
                search.max_funcs = max_funcs;
            }
            if activate_order_relations {
                search.deactivate_order_relations = false;
            }
            if activate_k_gt_1 {
                search.deactivate_k_gt_1 = false;
            }
            if let Some(mode) = mode.as_deref().or(config.get("mode").map(String::as_str)) {
                search.mode = parse_mode(mode).map_err(data_err)?;
            }
            run_search(&data, &search, output.as_deref())
        }
        Command::Eval {
            tables,
            gold,
            predictions,
            gold_programs,
        } => eval(&tables, &gold, &predictions, gold_programs.as_deref()),
        Command::Linearize { tables } => {
            for (_, table) in read_tables(&tables)? {
                println!("{}", linearize_table(&table));
            }
            Ok(())
        }
        Command::NlgSerialize { data } => nlg_serialize(&data),
        Command::Flatten { table } => {
            let t = read_table(&table)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&flatten_for_export(&t)).unwrap()
            );
            Ok(())
        }
        Command::Stats { search_output } => {
            let text = fs::read_to_string(&search_output)
                .with_context(|| format!("reading {}", search_output.display()))
                .map_err(data_err)?;
            let records: Vec<SampleSearchRecord> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(serde_json::from_str)
                .collect::<Result<_, _>>()
                .map_err(|e| data_err(anyhow!(e)))?;
            let report = search_stats(&records);
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(())
        }
    }
}

fn parse_mode(text: &str) -> anyhow::Result<SearchMode> {
    match text {
        "weak" => Ok(SearchMode::Weak),
        "partial" => Ok(SearchMode::Partial),
        other => Err(anyhow!("unknown mode '{other}', expected weak or partial")),
    }
}

fn apply_config(
    search: &mut SearchConfig,
    config: &BTreeMap<String, String>,
) -> anyhow::Result<()> {
    for (key, value) in config {
        match key.as_str() {
            "budget" | "max_samples_per_item" => search.max_samples_per_item = value.parse()?,
            "seed" => search.seed = value.parse()?,
            "max_funcs" => search.max_funcs = value.parse()?,
            "deactivate_order_relations" => search.deactivate_order_relations = value.parse()?,
            "deactivate_k_gt_1" => search.deactivate_k_gt_1 = value.parse()?,
            "mode" | "jobs" => {}
            other => return Err(anyhow!("unknown config key '{other}'")),
        }
    }
    Ok(())
}

fn table_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(data_err)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "json"))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(path.clone());
        }
    }
    Ok(files)
}

fn read_table(path: &Path) -> Result<HierTable, Failure> {
    let bytes = fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(data_err)?;
    load_table(&bytes)
        .with_context(|| format!("loading {}", path.display()))
        .map_err(data_err)
}

fn read_tables(paths: &[PathBuf]) -> Result<Vec<(PathBuf, HierTable)>, Failure> {
    table_files(paths)?
        .into_iter()
        .map(|path| read_table(&path).map(|t| (path, t)))
        .collect()
}

fn table_map(paths: &[PathBuf]) -> Result<BTreeMap<String, HierTable>, Failure> {
    Ok(read_tables(paths)?
        .into_iter()
        .map(|(_, t)| (t.table_id.clone(), t))
        .collect())
}

fn read_samples(path: &Path) -> Result<Vec<Sample>, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(data_err)?;
    load_samples(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(data_err)
}

fn ingest(paths: &[PathBuf]) -> Result<(), Failure> {
    for path in table_files(paths)? {
        let bytes = fs::read(&path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(data_err)?;
        let line = match load_table(&bytes) {
            Ok(table) => {
                let decision = admit_table(&table);
                let mut obj = serde_json::to_value(&decision).unwrap();
                obj["table_id"] = serde_json::Value::String(table.table_id.clone());
                obj["path"] = serde_json::Value::String(path.display().to_string());
                obj
            }
            Err(e) => serde_json::json!({
                "path": path.display().to_string(),
                "decision": "reject",
                "reason": { "load_error": e.to_string() },
            }),
        };
        println!("{}", serde_json::to_string(&line).unwrap());
    }
    Ok(())
}

fn run_search(
    data: &DataArgs,
    config: &SearchConfig,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let tables = table_map(&data.tables)?;
    let samples = read_samples(&data.samples)?;
    let qa: Vec<&Sample> = samples.iter().filter(|s| !s.answers.is_empty()).collect();
    for sample in &qa {
        if !tables.contains_key(&sample.table_id) {
            return Err(data_err(anyhow!(
                "sample {} references unknown table {}",
                sample.sample_id,
                sample.table_id
            )));
        }
    }
    let records: Vec<SampleSearchRecord> = qa
        .par_iter()
        .map(|sample| search_sample_record(sample, &tables[&sample.table_id], config))
        .collect();

    let mut sink: Box<dyn Write> = match output {
        Some(path) => Box::new(
            fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))
                .map_err(data_err)?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    for record in &records {
        writeln!(sink, "{}", serde_json::to_string(record).unwrap())
            .context("writing output")
            .map_err(data_err)?;
    }
    let report = search_stats(&records);
    eprintln!(
        "searched {} samples: mean consistent {:.2}, coverage {:.3}",
        report.n_samples, report.mean_consistent, report.coverage
    );
    Ok(())
}

fn eval(
    tables: &[PathBuf],
    gold: &Path,
    predictions: &Path,
    gold_programs: Option<&Path>,
) -> Result<(), Failure> {
    let tables = table_map(tables)?;
    let samples: Vec<Sample> = read_samples(gold)?
        .into_iter()
        .filter(|s| !s.answers.is_empty())
        .collect();
    let text = fs::read_to_string(predictions)
        .with_context(|| format!("reading {}", predictions.display()))
        .map_err(data_err)?;
    let predictions: Vec<Prediction> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect::<Result<_, _>>()
        .map_err(|e| data_err(anyhow!(e)))?;
    let dataset = EvalDataset {
        samples: &samples,
        tables: &tables,
    };
    let accuracy = execution_accuracy(&predictions, &dataset).map_err(|e| data_err(anyhow!(e)))?;
    let mut report = serde_json::json!({
        "n_samples": samples.len(),
        "execution_accuracy": accuracy,
    });
    if let Some(path) = gold_programs {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(data_err)?;
        let mut map = BTreeMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let value: serde_json::Value =
                serde_json::from_str(line).map_err(|e| data_err(anyhow!(e)))?;
            let id = value["sample_id"]
                .as_str()
                .ok_or_else(|| data_err(anyhow!("gold program line missing sample_id")))?;
            let program = value["program"]
                .as_str()
                .ok_or_else(|| data_err(anyhow!("gold program line missing program")))?;
            map.insert(id.to_string(), program.to_string());
        }
        let with_programs: Vec<Prediction> = predictions
            .iter()
            .filter(|p| p.program.is_some())
            .cloned()
            .collect();
        let rate =
            spurious_rate(&with_programs, &map, &dataset).map_err(|e| data_err(anyhow!(e)))?;
        report["spurious_rate"] = serde_json::json!(rate);
    }
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}

fn nlg_serialize(data: &DataArgs) -> Result<(), Failure> {
    let tables = table_map(&data.tables)?;
    let samples = read_samples(&data.samples)?;
    for sample in &samples {
        let Some(highlighted) = &sample.highlighted_cells else {
            continue;
        };
        let table = tables.get(&sample.table_id).ok_or_else(|| {
            data_err(anyhow!(
                "sample {} references unknown table {}",
                sample.sample_id,
                sample.table_id
            ))
        })?;
        let operators: Vec<String> = match &sample.operators {
            Some(ops) => ops.clone(),
            None => sample
                .formula
                .as_deref()
                .and_then(|f| parse_formula(f).ok())
                .map(|ast| {
                    extract_alignment(&ast)
                        .0
                        .into_iter()
                        .map(|l| l.name().to_string())
                        .collect()
                })
                .unwrap_or_default(),
        };
        let results: Vec<f64> = if operators.is_empty() {
            Vec::new()
        } else {
            let value = sample
                .formula
                .as_deref()
                .ok_or_else(|| {
                    data_err(anyhow!(
                        "sample {} has operators but no formula to precompute results",
                        sample.sample_id
                    ))
                })
                .and_then(|f| {
                    parse_formula(f)
                        .and_then(|ast| eval_formula(&ast, table))
                        .map_err(|e| data_err(anyhow!("sample {}: {e}", sample.sample_id)))
                })?;
            match value.as_number() {
                Some(x) => vec![x; operators.len()],
                None => {
                    return Err(data_err(anyhow!(
                        "sample {}: formula result is not numeric",
                        sample.sample_id
                    )))
                }
            }
        };
        let line = serialize_for_nlg(table, highlighted, &operators, &results)
            .map_err(|e| data_err(anyhow!("sample {}: {e}", sample.sample_id)))?;
        println!("{line}");
    }
    Ok(())
}
