//! Command-line pipeline for chronological event networks: generate or load
//! event data, build and prune networks, measure them, mine communities and
//! change points, and replay the bundled experiment reproductions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chronnet::error::{Error, Result};
use chronnet::events::{
    load_events, write_events, EventFormat, EventSet, FilterSpec, TimeGranularity,
};
use chronnet::fit::{compare_tail_fits, fit_log_normal, fit_power_law};
use chronnet::grid::{BBox, GridSpec};
use chronnet::measures::{centrality, degree, distribution, strength, CentralityKind};
use chronnet::mining::{
    best_partition, change_points, cluster_events, correct_series, cut_dendrogram, fast_greedy,
    label_propagation, outlier_nodes, CommunitySeries, OutlierMetric, Partition, NOISE_LABEL,
};
use chronnet::network::{
    build, build_parallel, build_snapshots, read_network, write_network, Chronnet,
};
use chronnet::pipeline::{repro, run, RunConfig};
use chronnet::scenarios::{build_scenario, builtin_scenarios};
use chronnet::CellId;

#[derive(Parser)]
#[command(
    name = "chronnet",
    version,
    about = "Chronological networks from spatiotemporal events"
)]
struct Cli {
    /// Worker threads for chunked construction.
    #[arg(long, global = true, env = "CHRONNET_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EventArgs {
    /// Event file to read.
    #[arg(long)]
    events: PathBuf,
    /// Input format: generic-csv or mcd14ml-csv.
    #[arg(long, default_value = "generic-csv")]
    format: String,
    /// Keep only records with confidence strictly above this (mcd14ml).
    #[arg(long, default_value_t = 75.0)]
    min_confidence: f64,
    /// Timestamp granularity for mcd14ml: day or minute.
    #[arg(long, default_value = "minute")]
    granularity: String,
}

impl EventArgs {
    fn load(&self) -> Result<EventSet> {
        let granularity = TimeGranularity::parse(&self.granularity)?;
        let format = EventFormat::parse(&self.format, granularity)?;
        let filters = match format {
            EventFormat::Mcd14ml { .. } => FilterSpec {
                min_confidence: Some(self.min_confidence),
            },
            EventFormat::GenericCsv => FilterSpec::default(),
        };
        Ok(load_events(&self.events, format, &filters)?.sorted())
    }
}

#[derive(Args)]
struct GridArgs {
    /// Grid as JSON, e.g. '{"kind":"rect","bbox":{...},"nx":10,"ny":10}'.
    #[arg(long)]
    grid: Option<String>,
    /// Rectangular grid columns (bounding box from the data unless --bbox).
    #[arg(long, default_value_t = 10)]
    nx: u32,
    /// Rectangular grid rows.
    #[arg(long, default_value_t = 10)]
    ny: u32,
    /// Hexagon circumradius; switches to the hexagonal tiling.
    #[arg(long)]
    hex_r: Option<f64>,
    /// Bounding box as xmin,xmax,ymin,ymax.
    #[arg(long)]
    bbox: Option<String>,
}

impl GridArgs {
    fn resolve(&self, es: &EventSet) -> Result<GridSpec> {
        if let Some(json) = &self.grid {
            let spec: GridSpec = serde_json::from_str(json)
                .map_err(|e| Error::InvalidParameter(format!("bad --grid JSON: {e}")))?;
            spec.validate()?;
            return Ok(spec);
        }
        let bbox = match &self.bbox {
            Some(raw) => {
                let parts: Vec<f64> = raw
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| {
                        Error::InvalidParameter(format!("bad --bbox `{raw}`, expected 4 numbers"))
                    })?;
                if parts.len() != 4 {
                    return Err(Error::InvalidParameter(format!(
                        "bad --bbox `{raw}`, expected 4 numbers"
                    )));
                }
                BBox::new(parts[0], parts[1], parts[2], parts[3])
            }
            None => {
                let (xmin, xmax, ymin, ymax) = es
                    .bounding_box()
                    .ok_or_else(|| Error::EmptyInput("no events to derive a grid from".into()))?;
                BBox::new(xmin, xmax, ymin, ymax)
            }
        };
        match self.hex_r {
            Some(r) => GridSpec::hex(bbox, r),
            None => GridSpec::rect(bbox, self.nx, self.ny),
        }
    }
}

fn parse_dmax(raw: &str) -> Result<Option<f64>> {
    match raw {
        "inf" | "none" => Ok(None),
        other => other
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Error::InvalidParameter(format!("bad --dmax `{other}`"))),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate events from a named scenario.
    Generate {
        /// Scenario name (see --list).
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output events CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parameter override key=value (repeatable).
        #[arg(long = "param", value_name = "K=V")]
        params: Vec<String>,
        /// Emit parallel events: independent per-cell draws with this many
        /// expected events per tick (cell-probability scenarios only).
        #[arg(long, value_name = "PER_TICK")]
        bernoulli: Option<f64>,
        /// List available scenarios and their defaults.
        #[arg(long)]
        list: bool,
    },
    /// Build a chronnet from sorted events.
    Build {
        #[command(flatten)]
        events: EventArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1)]
        h: usize,
        /// Maximum link distance, or `inf`.
        #[arg(long, default_value = "inf")]
        dmax: String,
        /// Keep the directed network (default projects to undirected).
        #[arg(long)]
        directed: bool,
        /// Materialize every grid cell as a node, not just occupied cells.
        #[arg(long)]
        all_cells: bool,
        /// Output edge list (companion meta JSON is written alongside).
        #[arg(long)]
        out: PathBuf,
        /// Also write the node -> center table.
        #[arg(long)]
        cells_out: Option<PathBuf>,
    },
    /// Remove weak links by threshold or keep the strongest fraction.
    Prune {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        tau: Option<u64>,
        /// Keep this fraction of the heaviest links (ties included).
        #[arg(long)]
        keep_top: Option<f64>,
        /// Also drop nodes left without links.
        #[arg(long)]
        drop_isolated: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build one chronnet per time window.
    Snapshots {
        #[command(flatten)]
        events: EventArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1)]
        h: usize,
        #[arg(long, default_value = "inf")]
        dmax: String,
        /// Window length in timestamp units.
        #[arg(long)]
        dt: f64,
        /// Output directory (net_000.csv, net_001.csv, ... + windows.json).
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Compute network measures.
    Measure {
        #[arg(long)]
        input: PathBuf,
        /// Comma list: degree,strength,paths,weighted-paths,transitivity,
        /// density,betweenness,closeness,weighted-closeness.
        #[arg(long, default_value = "degree,strength")]
        metrics: String,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-node CSV output.
        #[arg(long)]
        pernode_out: Option<PathBuf>,
        /// Distribution table output (degree and strength histograms).
        #[arg(long)]
        distributions_out: Option<PathBuf>,
    },
    /// Fit a heavy-tail model to a column of a per-node CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "degree")]
        column: String,
        /// powerlaw, lognormal, or both.
        #[arg(long, default_value = "powerlaw")]
        family: String,
        /// Treat samples as continuous rather than integer-valued.
        #[arg(long)]
        continuous: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detect communities.
    Communities {
        #[arg(long)]
        input: PathBuf,
        /// fastgreedy or labelprop.
        #[arg(long, default_value = "fastgreedy")]
        method: String,
        /// Cut the dendrogram at this community count (fastgreedy only).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// node,community CSV output.
        #[arg(long)]
        out: PathBuf,
        /// Merge-sequence CSV output (fastgreedy only).
        #[arg(long)]
        dendrogram_out: Option<PathBuf>,
    },
    /// Label every event with its cell's community.
    Cluster {
        #[command(flatten)]
        events: EventArgs,
        /// Network whose grid and nodes the partition refers to.
        #[arg(long)]
        net: PathBuf,
        /// node,community CSV from `communities`.
        #[arg(long)]
        partition: PathBuf,
        /// Temporal correction window radius (odd).
        #[arg(long)]
        delta: Option<usize>,
        /// t,x,y,community CSV output (-1 marks unlabeled cells).
        #[arg(long)]
        out: PathBuf,
    },
    /// Change points of a labeled event series.
    Changes {
        /// t,x,y,community CSV from `cluster`.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Highest-degree or highest-strength nodes.
    Outliers {
        #[arg(long)]
        input: PathBuf,
        /// degree or strength.
        #[arg(long, default_value = "degree")]
        metric: String,
        /// Fraction of nodes to flag, in (0, 1).
        #[arg(long)]
        top: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a JSON run config end to end.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Reproduce a bundled experiment class (fig1..fig5) with PASS/FAIL summary.
    Repro {
        #[arg(long)]
        figure: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for p in raw {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("bad --param `{p}`, expected k=v")))?;
        let value: f64 = v
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad --param value in `{p}`")))?;
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| Error::io(path, e)),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

fn load_partition(path: &Path, net: &Chronnet) -> Result<Partition> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        if idx == 0 || raw.trim().is_empty() {
            continue;
        }
        let line = idx + 1;
        let (node, community) = raw
            .split_once(',')
            .ok_or_else(|| Error::parse(path, line, "expected `node,community`"))?;
        let node: u32 = node
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad node `{node}`")))?;
        let community: usize = community
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad community `{community}`")))?;
        labels.insert(CellId(node), community);
    }
    let count = labels
        .values()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    let q = chronnet::mining::modularity(net, &labels).unwrap_or(f64::NAN);
    Ok(Partition {
        labels,
        community_count: count,
        q,
        method: "file".into(),
    })
}

fn csv_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let idx = header
        .split(',')
        .position(|c| c.trim() == column)
        .ok_or_else(|| Error::parse(path, 1, format!("no column `{column}`")))?;
    let mut out = Vec::new();
    for (i, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let field = raw.split(',').nth(idx).unwrap_or("");
        let v: f64 = field
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("bad value `{field}`")))?;
        out.push(v);
    }
    Ok(out)
}

fn load_series(path: &Path) -> Result<CommunitySeries> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let idx = header
        .split(',')
        .position(|c| c.trim() == "community")
        .ok_or_else(|| Error::parse(path, 1, "no `community` column"))?;
    let mut labels = Vec::new();
    let mut noise = 0;
    for (i, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let field = raw.split(',').nth(idx).unwrap_or("");
        let v: i64 = field
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("bad community `{field}`")))?;
        if v < 0 {
            labels.push(NOISE_LABEL);
            noise += 1;
        } else {
            labels.push(v as usize);
        }
    }
    Ok(CommunitySeries {
        labels,
        noise_count: noise,
    })
}

fn pernode_csv(net: &Chronnet, extra: &[(String, BTreeMap<CellId, f64>)]) -> Result<String> {
    let mut out = String::from("node,x,y,degree,strength");
    for (name, _) in extra {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let deg: BTreeMap<CellId, u64> = degree(net).into_iter().collect();
    let str_: BTreeMap<CellId, u64> = strength(net).into_iter().collect();
    for c in net.nodes() {
        let (x, y) = net.grid().cell_center(c)?;
        let _ = write!(out, "{c},{x},{y},{},{}", deg[&c], str_[&c]);
        for (_, values) in extra {
            let _ = write!(out, ",{}", values.get(&c).copied().unwrap_or(0.0));
        }
        out.push('\n');
    }
    Ok(out)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            scenario,
            seed,
            out,
            params,
            bernoulli,
            list,
        } => {
            if list {
                for info in builtin_scenarios() {
                    let defaults: Vec<String> = info
                        .defaults
                        .iter()
                        .map(|(k, v)| format!("{k}={v}"))
                        .collect();
                    println!(
                        "{:<14} {} [{}]",
                        info.name,
                        info.description,
                        defaults.join(", ")
                    );
                }
                return Ok(());
            }
            let name = scenario
                .ok_or_else(|| Error::InvalidParameter("--scenario required (or --list)".into()))?;
            let out = out.ok_or_else(|| Error::InvalidParameter("--out required".into()))?;
            let overrides = parse_params(&params)?;
            let mut inst = build_scenario(&name, seed, &overrides)?;
            if let Some(expected_per_tick) = bernoulli {
                match &mut inst.generator {
                    chronnet::scenarios::Generator::Prob(spec) => {
                        spec.mode = chronnet::datagen::SampleMode::Bernoulli { expected_per_tick };
                    }
                    chronnet::scenarios::Generator::Ode(_) => {
                        return Err(Error::InvalidParameter(
                            "--bernoulli applies to cell-probability scenarios only".into(),
                        ))
                    }
                }
            }
            let es = inst.generate()?;
            write_events(&es, &out)?;
            eprintln!("wrote {} events to {}", es.len(), out.display());
            Ok(())
        }
        Command::Build {
            events,
            grid,
            h,
            dmax,
            directed,
            all_cells,
            out,
            cells_out,
        } => {
            let es = events.load()?;
            let spec = grid.resolve(&es)?;
            let d_max = parse_dmax(&dmax)?;
            let chunks = cli.threads.unwrap_or(1).max(1);
            let mut net = if chunks > 1 {
                build_parallel(&es, &spec, h, d_max, chunks)?
            } else {
                build(&es, &spec, h, d_max)?
            };
            if all_cells {
                net = with_all_cells(&net)?;
            }
            if !directed {
                net = net.undirect()?;
            }
            write_network(&net, &out)?;
            if let Some(path) = cells_out {
                let mut table = String::from("node,x,y\n");
                for c in net.nodes() {
                    let (x, y) = spec.cell_center(c)?;
                    let _ = writeln!(table, "{c},{x},{y}");
                }
                fs::write(&path, table).map_err(|e| Error::io(&path, e))?;
            }
            eprintln!(
                "built {} nodes, {} links (total weight {}) -> {}",
                net.node_count(),
                net.link_count(),
                net.total_weight(),
                out.display()
            );
            Ok(())
        }
        Command::Prune {
            input,
            tau,
            keep_top,
            drop_isolated,
            out,
        } => {
            let mut net = read_network(&input)?;
            match (tau, keep_top) {
                (Some(t), None) => net = net.prune(t),
                (None, Some(f)) => net = net.prune_quantile(f)?,
                _ => {
                    return Err(Error::InvalidParameter(
                        "give exactly one of --tau or --keep-top".into(),
                    ))
                }
            }
            if drop_isolated {
                net = net.remove_isolated();
            }
            write_network(&net, &out)?;
            eprintln!("{} links remain -> {}", net.link_count(), out.display());
            Ok(())
        }
        Command::Snapshots {
            events,
            grid,
            h,
            dmax,
            dt,
            out_dir,
        } => {
            let es = events.load()?;
            let spec = grid.resolve(&es)?;
            let seq = build_snapshots(&es, &spec, h, parse_dmax(&dmax)?, dt)?;
            fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            let mut index = Vec::new();
            for (i, snap) in seq.windows.iter().enumerate() {
                let path = out_dir.join(format!("net_{i:03}.csv"));
                write_network(&snap.net, &path)?;
                index.push(serde_json::json!({
                    "window": i,
                    "t_start": snap.t_start,
                    "t_end": snap.t_end,
                    "nodes": snap.net.node_count(),
                    "links": snap.net.link_count(),
                }));
            }
            let index_path = out_dir.join("windows.json");
            fs::write(
                &index_path,
                serde_json::to_string_pretty(&index).expect("serializes"),
            )
            .map_err(|e| Error::io(&index_path, e))?;
            eprintln!("{} windows -> {}", seq.windows.len(), out_dir.display());
            Ok(())
        }
        Command::Measure {
            input,
            metrics,
            out,
            pernode_out,
            distributions_out,
        } => {
            let net = read_network(&input)?;
            let mut report = serde_json::Map::new();
            report.insert("nodes".into(), net.node_count().into());
            report.insert("links".into(), net.link_count().into());
            report.insert("total_weight".into(), net.total_weight().into());
            let mut extra: Vec<(String, BTreeMap<CellId, f64>)> = Vec::new();
            for metric in metrics.split(',').map(str::trim).filter(|m| !m.is_empty()) {
                match metric {
                    "degree" | "strength" => {}
                    "paths" => {
                        let ps = chronnet::measures::path_stats(&net, false)?;
                        report.insert(
                            "paths".into(),
                            serde_json::to_value(ps).expect("serializes"),
                        );
                    }
                    "weighted-paths" => {
                        let ps = chronnet::measures::path_stats(&net, true)?;
                        report.insert(
                            "weighted_paths".into(),
                            serde_json::to_value(ps).expect("serializes"),
                        );
                    }
                    "transitivity" => {
                        report.insert(
                            "transitivity".into(),
                            chronnet::measures::transitivity(&net)?.into(),
                        );
                    }
                    "density" => {
                        report.insert(
                            "density".into(),
                            chronnet::measures::edge_density(&net)?.into(),
                        );
                    }
                    kind @ ("betweenness" | "closeness" | "weighted-closeness") => {
                        let scores: BTreeMap<CellId, f64> =
                            centrality(&net, CentralityKind::parse(kind)?)?
                                .into_iter()
                                .collect();
                        extra.push((kind.to_string(), scores));
                    }
                    other => {
                        return Err(Error::InvalidParameter(format!("unknown metric `{other}`")))
                    }
                }
            }
            if let Some(path) = pernode_out {
                fs::write(&path, pernode_csv(&net, &extra)?).map_err(|e| Error::io(&path, e))?;
            }
            if let Some(dir) = distributions_out {
                fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                let degs: Vec<u64> = degree(&net).into_iter().map(|(_, k)| k).collect();
                let strs: Vec<u64> = strength(&net).into_iter().map(|(_, s)| s).collect();
                for (name, values) in [("degree", degs), ("strength", strs)] {
                    let mut table = String::from("value,fraction\n");
                    for (v, f) in distribution(&values)? {
                        let _ = writeln!(table, "{v},{f}");
                    }
                    let path = dir.join(format!("{name}_distribution.csv"));
                    fs::write(&path, table).map_err(|e| Error::io(&path, e))?;
                }
            }
            emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&serde_json::Value::Object(report))
                    .expect("serializes"),
            )
        }
        Command::Fit {
            input,
            column,
            family,
            continuous,
            out,
        } => {
            let values = csv_column(&input, &column)?;
            let discrete = !continuous;
            let result = match family.as_str() {
                "powerlaw" => serde_json::to_value(fit_power_law(&values, discrete)?),
                "lognormal" => serde_json::to_value(fit_log_normal(&values)?),
                "both" => serde_json::to_value(compare_tail_fits(&values, discrete)?),
                other => return Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
            }
            .expect("serializes");
            emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&result).expect("serializes"),
            )
        }
        Command::Communities {
            input,
            method,
            k,
            seed,
            out,
            dendrogram_out,
        } => {
            let net = read_network(&input)?;
            let partition = match method.as_str() {
                "fastgreedy" => {
                    let d = fast_greedy(&net)?;
                    if let Some(path) = dendrogram_out {
                        let mut table = String::from("a,b,q\n");
                        for m in &d.merges {
                            let _ = writeln!(table, "{},{},{}", m.a, m.b, m.q);
                        }
                        fs::write(&path, table).map_err(|e| Error::io(&path, e))?;
                    }
                    match k {
                        Some(k) => cut_dendrogram(&d, k)?,
                        None => best_partition(&d)?,
                    }
                }
                "labelprop" => label_propagation(&net, seed)?,
                other => return Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
            };
            let mut table = String::from("node,community\n");
            for (c, l) in &partition.labels {
                let _ = writeln!(table, "{c},{l}");
            }
            fs::write(&out, table).map_err(|e| Error::io(&out, e))?;
            println!(
                "{}",
                serde_json::json!({
                    "method": partition.method,
                    "communities": partition.community_count,
                    "q": partition.q,
                })
            );
            Ok(())
        }
        Command::Cluster {
            events,
            net,
            partition,
            delta,
            out,
        } => {
            let es = events.load()?;
            let network = read_network(&net)?;
            let p = load_partition(&partition, &network)?;
            let mut series = cluster_events(&es, network.grid(), &p)?;
            if let Some(d) = delta {
                series = correct_series(&series, d)?;
            }
            let mut table = String::from("t,x,y,community\n");
            for (e, &label) in es.events().iter().zip(&series.labels) {
                let printed: i64 = if label == NOISE_LABEL {
                    -1
                } else {
                    label as i64
                };
                let _ = writeln!(table, "{},{},{},{printed}", e.t, e.x, e.y);
            }
            fs::write(&out, table).map_err(|e| Error::io(&out, e))?;
            eprintln!(
                "{} events labeled ({} noise) -> {}",
                es.len(),
                series.noise_count,
                out.display()
            );
            Ok(())
        }
        Command::Changes { labels, out } => {
            let series = load_series(&labels)?;
            let points = change_points(&series);
            emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&serde_json::json!({ "change_points": points }))
                    .expect("serializes"),
            )
        }
        Command::Outliers {
            input,
            metric,
            top,
            out,
        } => {
            let net = read_network(&input)?;
            let report = outlier_nodes(&net, OutlierMetric::parse(&metric)?, top)?;
            emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&report).expect("serializes"),
            )
        }
        Command::Run { config, out_dir } => {
            let mut config = RunConfig::from_file(&config)?;
            if config.chunks.is_none() {
                config.chunks = cli.threads.filter(|&t| t > 1);
            }
            let report = run(&config, &out_dir)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("serializes")
            );
            Ok(())
        }
        Command::Repro { figure, out_dir } => {
            let report = repro(&figure, &out_dir)?;
            for line in report.summary_lines() {
                println!("{line}");
            }
            if report.passed {
                Ok(())
            } else {
                Err(Error::Config(format!("{figure} reproduction failed")))
            }
        }
    }
}

/// Copy of the network with every grid cell materialized as a node.
fn with_all_cells(net: &Chronnet) -> Result<Chronnet> {
    let nodes = net.grid().all_cells().collect();
    Chronnet::from_links(
        net.grid().clone(),
        net.directed(),
        nodes,
        net.links().collect(),
        net.meta().clone(),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
