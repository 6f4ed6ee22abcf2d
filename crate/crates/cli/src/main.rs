mod net;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ols_core::dataload::{
    self, default_cache_dir, is_http, load_config, CachingFetcher, DataloadOptions, DatasetManifest, LoadCounts,
    LoadStatus, MANIFEST_FILE,
};
use ols_core::dataset::Dataset;
use ols_core::linker::{convert_registry_export, load_registry, Registry};
use serde_json::json;

const OK: u8 = 0;
const FATAL: u8 = 1;
const WARNINGS: u8 = 2;

const DEFAULT_REGISTRY_SOURCE: &str =
    "https://raw.githubusercontent.com/biopragmatics/bioregistry/main/exports/registry/registry.json";

#[derive(Parser)]
#[command(name = "ols", version, about = "Ontology lookup service")]
struct Cli {
    /// Log debug output to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an ontology config file.
    Validate {
        /// Ontology config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Print the verdict as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Load every configured ontology into a dataset directory.
    Dataload {
        /// Ontology config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Dataset directory to write.
        #[arg(long)]
        out: PathBuf,
        /// Ontologies loaded in parallel.
        #[arg(long, default_value_t = 4)]
        workers: usize,
        /// Never touch the network; remote sources must be in the cache.
        #[arg(long)]
        offline: bool,
        /// Registry snapshot; defaults to registry.json next to the config.
        #[arg(long)]
        registry: Option<PathBuf>,
        /// Print the manifest as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Serve a dataset over HTTP. SIGHUP reloads it from disk.
    Serve {
        /// Dataset directory written by `dataload`.
        #[arg(long, env = "OLS_DATA")]
        data: PathBuf,
        #[arg(long, env = "OLS_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "OLS_HOST", default_value = "127.0.0.1")]
        host: String,
        /// Page size when a request gives none.
        #[arg(long, env = "OLS_PAGE_SIZE", default_value_t = ols_server::DEFAULT_PAGE_SIZE)]
        page_size: usize,
    },
    /// Refresh the vendored prefix registry snapshot.
    RegistrySync {
        /// Snapshot file to replace.
        #[arg(long)]
        out: PathBuf,
        /// http(s) URL or file: URL of a registry export.
        #[arg(long, default_value = DEFAULT_REGISTRY_SOURCE)]
        source: String,
    },
    /// Print entity counts from a dataset manifest.
    Stats {
        /// Dataset directory written by `dataload`.
        #[arg(long)]
        data: PathBuf,
        /// Only this ontology.
        #[arg(long)]
        ontology: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    let code = match cli.command {
        Command::Validate { config, json } => validate(&config, json),
        Command::Dataload {
            config,
            out,
            workers,
            offline,
            registry,
            json,
        } => run_dataload(&config, &out, workers, offline, registry.as_deref(), json),
        Command::Serve {
            data,
            port,
            host,
            page_size,
        } => serve(&data, &host, port, page_size),
        Command::RegistrySync { out, source } => registry_sync(&out, &source),
        Command::Stats { data, ontology, json } => stats(&data, ontology.as_deref(), json),
    };
    ExitCode::from(code)
}

fn validate(path: &Path, json: bool) -> u8 {
    match load_config(path) {
        Ok(configs) => {
            if json {
                let entries: Vec<_> = configs.iter().map(|c| json!({"id": c.id, "source": c.source, "ok": true})).collect();
                println!("{}", json!({"valid": true, "ontologies": entries}));
            } else {
                for c in &configs {
                    println!("ok\t{}\t{}", c.id, c.source);
                }
            }
            OK
        }
        Err(e) => {
            if json {
                println!("{}", json!({"valid": false, "error": e.to_string()}));
            }
            log::error!("{}: {e}", path.display());
            FATAL
        }
    }
}

fn run_dataload(config: &Path, out: &Path, workers: usize, offline: bool, registry: Option<&Path>, json: bool) -> u8 {
    let configs = match load_config(config) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{}: {e}", config.display());
            return FATAL;
        }
    };
    let registry_path = registry
        .map(Path::to_path_buf)
        .or_else(|| Some(config.parent()?.join("registry.json")).filter(|p| p.exists()));
    let registry = match registry_path {
        Some(p) => match load_registry(&p) {
            Ok(r) => r,
            Err(e) => {
                log::error!("{e}");
                return FATAL;
            }
        },
        None => {
            log::warn!("no registry snapshot; CURIEs fall back to preferred prefixes");
            Registry::default()
        }
    };
    let network: Option<Box<dyn dataload::Fetcher>> = if offline { None } else { Some(Box::new(net::HttpFetcher::new())) };
    let fetcher = CachingFetcher::new(default_cache_dir(), network);
    let options = DataloadOptions {
        workers,
        fetcher: &fetcher,
        registry: &registry,
    };
    let manifest = match dataload::run_dataload(&configs, out, &options) {
        Ok(m) => m,
        Err(e) => {
            log::error!("{e}");
            return FATAL;
        }
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&manifest).unwrap_or_default());
    } else {
        println!("{:<16} {:<8} {:>9} {:>10} {:>9}", "ontology", "status", "entities", "duration", "warnings");
        for o in &manifest.ontologies {
            println!(
                "{:<16} {:<8} {:>9} {:>8}ms {:>9}",
                o.id,
                status_name(o.status),
                o.counts.entities,
                o.duration_ms,
                o.warnings.len()
            );
        }
        println!("version {}", manifest.version);
    }
    if manifest.failed().next().is_some() {
        WARNINGS
    } else {
        OK
    }
}

fn status_name(s: LoadStatus) -> &'static str {
    match s {
        LoadStatus::Success => "ok",
        LoadStatus::Failed => "failed",
    }
}

fn serve(data: &Path, host: &str, port: u16, page_size: usize) -> u8 {
    if !(1..=ols_core::search::MAX_PAGE_SIZE).contains(&page_size) {
        log::error!("page size must be between 1 and {}", ols_core::search::MAX_PAGE_SIZE);
        return FATAL;
    }
    let dataset = match Dataset::open(data) {
        Ok(d) => d,
        Err(e) => {
            log::error!("cannot open dataset: {e}");
            return FATAL;
        }
    };
    let addr: SocketAddr = match format!("{host}:{port}").parse() {
        Ok(a) => a,
        Err(e) => {
            log::error!("bad listen address {host}:{port}: {e}");
            return FATAL;
        }
    };
    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(r) => r,
        Err(e) => {
            log::error!("{e}");
            return FATAL;
        }
    };
    let state = ols_server::AppState::new(Some(dataset), page_size);
    runtime.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(addr).await {
            Ok(l) => l,
            Err(e) => {
                log::error!("cannot bind {addr}: {e}");
                return FATAL;
            }
        };
        match listener.local_addr() {
            Ok(a) => log::info!("listening on http://{a}"),
            Err(_) => log::info!("listening on http://{addr}"),
        }
        spawn_reloader(state.clone(), data.to_path_buf());
        if let Some(ds) = state.current() {
            tokio::task::spawn_blocking(move || {
                ds.warm();
                log::info!("entity records ready");
            });
        }
        match ols_server::serve(listener, state, shutdown_signal()).await {
            Ok(()) => {
                log::info!("shut down");
                OK
            }
            Err(e) => {
                log::error!("{e}");
                FATAL
            }
        }
    })
}

#[cfg(unix)]
fn spawn_reloader(state: std::sync::Arc<ols_server::AppState>, dir: PathBuf) {
    use tokio::signal::unix::{signal, SignalKind};
    let Ok(mut hup) = signal(SignalKind::hangup()) else { return };
    tokio::spawn(async move {
        while hup.recv().await.is_some() {
            let dir = dir.clone();
            let state = state.clone();
            let result = tokio::task::spawn_blocking(move || state.reload(&dir)).await;
            match result {
                Ok(Ok(version)) => log::info!("reloaded dataset {version}"),
                Ok(Err(e)) => log::error!("reload failed, keeping the current dataset: {e}"),
                Err(e) => log::error!("reload task failed: {e}"),
            }
        }
    });
}

#[cfg(not(unix))]
fn spawn_reloader(_: std::sync::Arc<ols_server::AppState>, _: PathBuf) {}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        let mut term = match signal(SignalKind::terminate()) {
            Ok(s) => s,
            Err(_) => return std::future::pending().await,
        };
        tokio::select! {
            _ = tokio::signal::ctrl_c() => {}
            _ = term.recv() => {}
        }
    }
    #[cfg(not(unix))]
    let _ = tokio::signal::ctrl_c().await;
}

fn registry_sync(out: &Path, source: &str) -> u8 {
    let bytes = if is_http(source) {
        match net::get(source) {
            Ok(b) => b,
            Err(e) => {
                log::error!("{e}");
                return FATAL;
            }
        }
    } else {
        let path = dataload::file_url_to_path(source).unwrap_or_else(|| PathBuf::from(source));
        match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                log::error!("{}: {e}", path.display());
                return FATAL;
            }
        }
    };
    let registry = serde_json::from_slice(&bytes)
        .map_err(|e| e.to_string())
        .and_then(|doc| convert_registry_export(&doc).map_err(|e| e.to_string()))
        .and_then(|entries| Registry::new(entries).map_err(|e| e.to_string()));
    let registry = match registry {
        Ok(r) => r,
        Err(e) => {
            log::error!("{source}: {e}");
            return FATAL;
        }
    };
    if let Err(e) = dataload::write_atomic(out, registry.to_json().as_bytes()) {
        log::error!("{}: {e}", out.display());
        return FATAL;
    }
    println!("{} prefixes written to {}", registry.entries().len(), out.display());
    OK
}

fn stats(data: &Path, ontology: Option<&str>, json: bool) -> u8 {
    let path = data.join(MANIFEST_FILE);
    let manifest: DatasetManifest = match std::fs::read(&path)
        .map_err(|e| e.to_string())
        .and_then(|b| serde_json::from_slice(&b).map_err(|e| e.to_string()))
    {
        Ok(m) => m,
        Err(e) => {
            log::error!("{}: {e}", path.display());
            return FATAL;
        }
    };
    let selected: Vec<_> = match ontology {
        Some(id) => match manifest.ontology(id) {
            Some(o) => vec![o],
            None => {
                log::error!("unknown ontology '{id}'");
                return FATAL;
            }
        },
        None => manifest.ontologies.iter().collect(),
    };
    let mut total = LoadCounts::default();
    for o in &selected {
        let c = &o.counts;
        total.entities += c.entities;
        total.classes += c.classes;
        total.properties += c.properties;
        total.individuals += c.individuals;
        total.dangling += c.dangling;
        total.parsed_triples += c.parsed_triples;
        total.warnings += c.warnings;
    }
    let mut languages: Vec<&String> = selected.iter().flat_map(|o| &o.languages).collect();
    languages.sort();
    languages.dedup();
    total.languages = languages.len();
    if json {
        let rows: Vec<_> = selected
            .iter()
            .map(|o| json!({"id": o.id, "status": o.status, "counts": o.counts, "languages": o.languages}))
            .collect();
        println!("{}", json!({"version": manifest.version, "ontologies": rows, "total": total}));
        return OK;
    }
    println!(
        "{:<16} {:>8} {:>10} {:>11} {:>9} {:>8}",
        "ontology", "classes", "properties", "individuals", "languages", "dangling"
    );
    let row = |name: &str, c: &LoadCounts| {
        println!(
            "{:<16} {:>8} {:>10} {:>11} {:>9} {:>8}",
            name, c.classes, c.properties, c.individuals, c.languages, c.dangling
        )
    };
    for o in &selected {
        row(&o.id, &o.counts);
    }
    row("total", &total);
    OK
}
