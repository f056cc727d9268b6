mod server;

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context as _, Result};
use clap::{Parser, Subcommand};
use qmt::frontend::{Format, QueryService, DEFAULT_MAX_RESULTS};
use qmt::index::Index;
use qmt::mmtlib::{self, Library, MmtHost};

#[derive(Parser)]
#[command(name = "qmt", version, about = "Typed queries over formal mathematical libraries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load libraries, extract their facts and report counts.
    Check {
        #[arg(required = true)]
        libraries: Vec<PathBuf>,
    },
    /// Typecheck and evaluate a query document.
    Eval {
        library: PathBuf,
        /// Text, XML or JSON query document; `-` reads standard input.
        query: PathBuf,
        /// Further libraries to register alongside the first.
        #[arg(long = "with", value_name = "LIBRARY")]
        extra: Vec<PathBuf>,
        #[arg(long)]
        lenient_filter: bool,
        /// Output format; defaults to the format of the query document.
        #[arg(long)]
        format: Option<Format>,
        /// Index cache written by `qmt index`.
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_RESULTS)]
        max_results: usize,
    },
    /// Serve queries over HTTP. QMT_PORT overrides --port.
    Serve {
        #[arg(required = true)]
        libraries: Vec<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = DEFAULT_MAX_RESULTS)]
        max_results: usize,
    },
    /// Build the indices and write them to a cache file.
    Index {
        #[arg(required = true)]
        libraries: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Exit codes for `eval` by response status.
fn exit_code(status: u16, undefined: bool) -> u8 {
    match status {
        200 if undefined => 3,
        200 => 0,
        400 => 2,
        413 => 4,
        _ => 5,
    }
}

fn load_libraries(paths: &[PathBuf]) -> Result<Library> {
    let libs = paths
        .iter()
        .map(|p| Library::load(p).with_context(|| format!("loading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let lib = Library::merge(libs).context("registering libraries")?;
    for w in lib.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(lib)
}

fn service(lib: Library, cache: Option<&Path>, max_results: usize) -> Result<QueryService> {
    let model = match cache {
        None => mmtlib::model(lib).context("building indices")?,
        Some(path) => {
            let hash = lib.content_hash();
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let index = Index::load(BufReader::new(file), &hash)
                .with_context(|| format!("loading index cache {}", path.display()))?;
            mmtlib::model_with_index(MmtHost::new(Arc::new(lib)), index)
        }
    };
    Ok(QueryService::new(model).with_max_results(max_results))
}

fn read_query(path: &Path) -> Result<String> {
    let mut s = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut s)?;
    } else {
        s = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Check { libraries } => {
            let lib = load_libraries(&libraries)?;
            let s = mmtlib::stats(&lib);
            println!("theories  {}", s.theories);
            println!("constants {}", s.constants);
            println!("views     {}", s.views);
            println!("styles    {}", s.styles);
            println!("facts     {}", s.facts);
            println!("subterms  {}", s.subterms);
            Ok(0)
        }
        Command::Eval {
            library,
            query,
            extra,
            lenient_filter,
            format,
            index,
            max_results,
        } => {
            let mut paths = vec![library];
            paths.extend(extra);
            let svc = service(load_libraries(&paths)?, index.as_deref(), max_results)?;
            let src = read_query(&query)?;
            let response = svc.handle_with(&src, format, lenient_filter);
            std::io::stdout().write_all(response.body.as_bytes())?;
            Ok(exit_code(response.status, response.undefined))
        }
        Command::Serve {
            libraries,
            port,
            host,
            max_results,
        } => {
            let port = match std::env::var("QMT_PORT") {
                Ok(p) => p.parse().with_context(|| format!("QMT_PORT={p} is not a port"))?,
                Err(_) => port,
            };
            let svc = service(load_libraries(&libraries)?, None, max_results)?;
            server::serve(Arc::new(svc), &host, port)?;
            Ok(0)
        }
        Command::Index { libraries, out } => {
            let lib = load_libraries(&libraries)?;
            let lib = Arc::new(lib);
            let host = MmtHost::new(lib.clone());
            let index = mmtlib::build_library_index(&lib, &host).context("building indices")?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut w = BufWriter::new(file);
            index.save(&mut w, &lib.content_hash())?;
            w.flush()?;
            println!("wrote {} facts to {}", index.facts().len(), out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
