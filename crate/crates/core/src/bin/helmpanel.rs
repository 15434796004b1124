use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::Vector3;

use helmpanel::engine::{evaluate, sample_triangle, EvalRequest};
use helmpanel::estimator::DEFAULT_Q_CAP;
use helmpanel::geometry::Triangle3;
use helmpanel::report::{
    economize_csv, estimate_table, integrate_report, parse_angle, parse_projection, sweep, sweep_csv, SweepSpec,
};

/// Helmholtz potential integrals over plane triangles.
#[derive(Parser, Debug)]
#[command(name = "helmpanel", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate all integrals for one triangle and field point.
    Integrate {
        /// Vertices x1,y1,z1,x2,y2,z2,x3,y3,z3 (default: the sample triangle).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        tri: Option<Vec<f64>>,
        /// Field point px,py,pz.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Also compute the second normal derivative of I0.
        #[arg(long)]
        hyper: bool,
    },
    /// Errors against the oracle over a range of heights, as CSV.
    Sweep {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        tri: Option<Vec<f64>>,
        /// In-plane projection px,py, or vertex|interior|edge|exterior for
        /// the sample points on the sample triangle.
        #[arg(long, allow_hyphen_values = true, default_value = "vertex")]
        proj: String,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 1e-4)]
        zmin: f64,
        #[arg(long, default_value_t = 10.0)]
        zmax: f64,
        #[arg(long, default_value_t = 40)]
        steps: usize,
        /// Logarithmic spacing in z.
        #[arg(long)]
        log: bool,
        #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-6,1e-9,1e-12")]
        tols: Vec<f64>,
        /// Points per direction of the fixed polar rules to compare.
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        orders: Vec<usize>,
    },
    /// Error estimate table and selected order for given radial extents.
    Estimate {
        #[arg(long)]
        r_max: f64,
        #[arg(long, default_value_t = 0.0)]
        r_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_Q_CAP)]
        q_cap: usize,
    },
    /// Economized polynomial for cos and sin on [0, dx], as CSV.
    Economize {
        /// Range; accepts multiples of pi such as pi/2.
        #[arg(long, default_value = "pi/2")]
        dx: String,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
    },
}

fn triangle(v: Option<Vec<f64>>) -> Result<Triangle3, String> {
    match v {
        None => Ok(sample_triangle()),
        Some(c) if c.len() == 9 => Triangle3::from_slice(&c).map_err(|e| e.to_string()),
        Some(c) => Err(format!("--tri needs 9 values, got {}", c.len())),
    }
}

fn run(cmd: Cmd) -> Result<String, String> {
    match cmd {
        Cmd::Integrate { tri, point, k, tol, hyper } => {
            let tri = triangle(tri)?;
            let [x, y, z] = point[..] else {
                return Err(format!("--point needs 3 values, got {}", point.len()));
            };
            let mut req = EvalRequest::new(tri, Vector3::new(x, y, z), k, tol);
            req.want_hypersingular = hyper;
            let r = evaluate(&req).map_err(|e| e.to_string())?;
            Ok(integrate_report(&req, &r))
        }
        Cmd::Sweep { tri, proj, k, zmin, zmax, steps, log, tols, orders } => {
            let spec = SweepSpec {
                triangle: triangle(tri)?,
                proj: parse_projection(&proj).map_err(|e| e.to_string())?,
                k,
                z_min: zmin,
                z_max: zmax,
                steps,
                log,
                tols,
                orders,
            };
            let rows = sweep(&spec).map_err(|e| e.to_string())?;
            Ok(sweep_csv(&spec, &rows))
        }
        Cmd::Estimate { r_max, r_min, z, tol, q_cap } => {
            estimate_table(r_max, r_min, z, tol, q_cap).map_err(|e| e.to_string())
        }
        Cmd::Economize { dx, eps } => {
            let dx = parse_angle(&dx).map_err(|e| e.to_string())?;
            economize_csv(dx, eps).map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
