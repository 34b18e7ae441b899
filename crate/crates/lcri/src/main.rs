use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use lcri::cli::{self, ProveOptions};
use lcri::service::Store;

#[derive(Parser)]
#[command(
    name = "lcri",
    version,
    about = "Rewriting induction prover for constrained higher-order rewrite systems"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prove the lemmas and goals of a file.
    Prove {
        file: PathBuf,
        /// Only this goal (0-based); lemmas are always proved first.
        #[arg(long)]
        goal: Option<usize>,
        /// States visited by the fallback search.
        #[arg(long)]
        budget: Option<usize>,
        /// External SMT-LIB solver command, e.g. "z3 -in".
        #[arg(long)]
        smt: Option<String>,
        #[arg(long)]
        allow_conditional: bool,
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Parse, then check quasi-reductivity and rule orientation.
    Check { file: PathBuf },
    /// Normalize a ground term.
    Eval { file: PathBuf, term: String },
    /// Serve the HTTP session API.
    Serve {
        #[arg(long, default_value_t = 8787)]
        port: u16,
        #[arg(long)]
        trace_dir: Option<PathBuf>,
        #[arg(long)]
        smt: Option<String>,
    },
}

fn main() {
    let args = Args::parse();
    let (mut out, mut err) = (std::io::stdout(), std::io::stderr());
    let code = match args.command {
        Command::Prove {
            file,
            goal,
            budget,
            smt,
            allow_conditional,
            trace_dir,
        } => {
            let opts = ProveOptions {
                goal,
                budget,
                smt,
                allow_conditional,
                trace_dir,
            };
            cli::prove(&file, &opts, &mut out, &mut err)
        }
        Command::Check { file } => cli::check(&file, &mut out, &mut err),
        Command::Eval { file, term } => cli::eval(&file, &term, &mut out, &mut err),
        Command::Serve { port, trace_dir, smt } => serve(port, trace_dir, smt),
    };
    std::process::exit(code);
}

fn serve(port: u16, dir: Option<PathBuf>, smt: Option<String>) -> i32 {
    let solver = match cli::solver(smt.as_deref()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return cli::ERROR;
        }
    };
    let store = match dir {
        None => Store::new(solver, None),
        Some(d) => match Store::open(solver, d) {
            Ok((s, failures)) => {
                for (id, e) in failures {
                    eprintln!("session {id} not loaded: {e}");
                }
                s
            }
            Err(e) => {
                eprintln!("{e}");
                return cli::ERROR;
            }
        },
    };
    let rt = tokio::runtime::Runtime::new().expect("runtime");
    rt.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(("127.0.0.1", port)).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("port {port}: {e}");
                return cli::ERROR;
            }
        };
        eprintln!("listening on http://127.0.0.1:{port}/v1");
        let app = lcri::api::router(Arc::new(store));
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        match axum::serve(listener, app).with_graceful_shutdown(shutdown).await {
            Ok(()) => cli::OK,
            Err(e) => {
                eprintln!("{e}");
                cli::ERROR
            }
        }
    })
}
