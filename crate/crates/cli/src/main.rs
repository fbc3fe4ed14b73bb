mod scenario;

use std::collections::BTreeSet;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde_json::json;

use frmp_api::{AppState, Config};
use frmp_core::{
    build_graph, display_km, load_geojson, JunctionId, Mutation, SegmentId, Store, VehicleProfile,
    DEFAULT_SNAP_TOLERANCE_M, DEFAULT_SPEED_KMH,
};

#[derive(Parser)]
#[command(name = "frmp", version, about = "Forest road management platform")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load road segments from a GeoJSON FeatureCollection into the store.
    Ingest {
        geojson: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SNAP_TOLERANCE_M)]
        snap_tolerance: f64,
    },
    /// Compare the planned route, the naive drive and informed alternatives.
    Scenario {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        /// Blocked segment ids, or `none`. Defaults to the segments blocked
        /// by open reports in the store.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        block: Option<Vec<String>>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_SPEED_KMH)]
        speed: f64,
        #[arg(long, default_value_t = DEFAULT_SNAP_TOLERANCE_M)]
        snap_tolerance: f64,
        /// Print the comparison as JSON instead of tables.
        #[arg(long)]
        json: bool,
    },
    /// Run the HTTP service until interrupted.
    Serve {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, env = "FRMP_CONFIG")]
        config: Option<PathBuf>,
        /// Overrides `listen` from the config file.
        #[arg(long)]
        listen: Option<SocketAddr>,
    },
}

/// Exit status 1 for bad input or configuration, 2 when a well-formed
/// request has no answer (destination unreachable).
enum Failure {
    Input(anyhow::Error),
    Infeasible,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<frmp_core::Error> for Failure {
    fn from(e: frmp_core::Error) -> Self {
        Failure::Input(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest {
            geojson,
            store,
            snap_tolerance,
        } => {
            init_logging(false);
            ingest(&geojson, &store, snap_tolerance)
        }
        Command::Scenario {
            store,
            from,
            to,
            block,
            k,
            speed,
            snap_tolerance,
            json,
        } => {
            init_logging(false);
            run_scenario(&store, from, to, block, k, speed, snap_tolerance, json)
        }
        Command::Serve { store, config, listen } => {
            init_logging(true);
            serve(&store, config.as_deref(), listen)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Infeasible) => ExitCode::from(2),
    }
}

fn init_logging(service: bool) {
    use tracing_subscriber::EnvFilter;
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info"));
    if service {
        tracing_subscriber::fmt().json().with_env_filter(filter).with_writer(std::io::stdout).init();
    } else {
        tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).init();
    }
}

fn ingest(path: &Path, store_path: &Path, snap_tolerance: f64) -> Result<(), Failure> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let segments = load_geojson(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    if segments.is_empty() {
        return Err(anyhow!("{} holds no road segments", path.display()).into());
    }
    let store = Store::open(store_path).with_context(|| format!("opening {}", store_path.display()))?;
    let snap = store.snapshot();
    let mut merged = snap.segments.clone();
    let read = segments.len();
    let (mut added, mut changed) = (0, 0);
    let mut batch = Vec::new();
    for seg in segments {
        match merged.get(&seg.id).map(|old| *old == seg) {
            Some(true) => continue,
            Some(false) => changed += 1,
            None => added += 1,
        }
        batch.push(Mutation::PutSegment(seg.clone()));
        merged.insert(seg.id, seg);
    }
    // Build first so a network that cannot be routed is never committed.
    let graph = build_graph(merged.into_values(), snap_tolerance)?;
    store.commit(batch).context("committing segments")?;
    println!(
        "read {read} segments into {}: {added} new, {changed} updated, {} unchanged",
        store_path.display(),
        read - added - changed
    );
    println!(
        "network: {} segments, {} junctions, {} km total",
        graph.segments().len(),
        graph.junctions().len(),
        display_km(graph.total_length_m())
    );
    Ok(())
}

fn parse_blocks(raw: Option<Vec<String>>) -> anyhow::Result<Option<BTreeSet<SegmentId>>> {
    let Some(values) = raw else { return Ok(None) };
    let mut set = BTreeSet::new();
    for v in values {
        let v = v.trim();
        if v.eq_ignore_ascii_case("none") {
            continue;
        }
        let id: u64 = v.parse().map_err(|_| anyhow!("--block expects segment ids or `none`, got {v:?}"))?;
        set.insert(SegmentId(id));
    }
    Ok(Some(set))
}

#[allow(clippy::too_many_arguments)]
fn run_scenario(
    store_path: &Path,
    from: u64,
    to: u64,
    block: Option<Vec<String>>,
    k: usize,
    speed: f64,
    snap_tolerance: f64,
    as_json: bool,
) -> Result<(), Failure> {
    if !store_path.exists() {
        return Err(anyhow!("store {} does not exist; run `frmp ingest` first", store_path.display()).into());
    }
    if k == 0 {
        return Err(anyhow!("--k must be at least 1").into());
    }
    let profile = VehicleProfile::new("cli", speed)?;
    let store = Store::open(store_path)?;
    let snap = store.snapshot();
    let graph = build_graph(snap.segments.values().cloned(), snap_tolerance)?;
    let blocked = match parse_blocks(block)? {
        Some(set) => set,
        None => snap.book.blocked_segments(&snap.catalog),
    };
    if let Some(unknown) = blocked.iter().find(|s| graph.segment(**s).is_none()) {
        return Err(anyhow!("blocked segment {unknown} is not in the store").into());
    }
    let s = scenario::run(&graph, JunctionId(from), JunctionId(to), blocked, k, &profile)?;
    if as_json {
        let doc = json!({
            "from": from,
            "to": to,
            "speed_kmh": speed,
            "blocked": s.blocked,
            "unreachable": s.unreachable,
            "comparison": s.comparison,
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("comparison serializes"));
    } else {
        print!("{}", scenario::render(&s));
    }
    if s.unreachable {
        return Err(Failure::Infeasible);
    }
    Ok(())
}

fn serve(store_path: &Path, config_path: Option<&Path>, listen: Option<SocketAddr>) -> Result<(), Failure> {
    let mut config = match config_path {
        Some(p) => Config::load(p).with_context(|| format!("loading config {}", p.display()))?,
        None => Config::default(),
    };
    if let Some(addr) = listen {
        config.listen = addr;
    }
    let store = Store::open(store_path).with_context(|| format!("opening {}", store_path.display()))?;
    if store.persist_if_missing()? {
        tracing::warn!(store = %store_path.display(), "store did not exist; created an empty one");
    }
    let state = AppState::new(&config, store)?;

    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(config.listen)
            .await
            .with_context(|| format!("binding {}", config.listen))?;
        let addr = listener.local_addr().context("reading bound address")?;
        tracing::info!(%addr, public_read = config.public_read, "listening");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        };
        frmp_api::serve(listener, state, shutdown).await.context("serving")?;
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(())
}
