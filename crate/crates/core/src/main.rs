use clap::{Parser, Subcommand, ValueEnum};
use heisbis::bisector::{bisector_field, sample_bisector, Aabb};
use heisbis::boundary::BoundaryPoint;
use heisbis::curvature::{
    mean_curvature, plane_field, s1_curvature, s1_field, write_grid_on_surface, write_grid_xy, Grid2,
};
use heisbis::heis::{dist_k, HeisPoint};
use heisbis::io::{fmt_f64, read_points_csv, write_points_csv};
use heisbis::mesh::{export_mesh, marching_cubes, MeshFormat};
use heisbis::similarity::normalize_pair;
use heisbis::spinal::{fit_spinal_report, FitOptions};
use heisbis::verify::{run_verify, Suite};
use heisbis::{Error, Result};
use std::io::{BufWriter, Write};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "heisbis", version, about = "Korányi bisectors, spinal spheres and horizontal curvature")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Korányi distance between two points
    Dist {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        p1: HeisPoint,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        p2: HeisPoint,
    },
    /// Similarity taking a pair to its canonical representative, as JSON
    Normalize {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        p1: HeisPoint,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        p2: HeisPoint,
    },
    /// Bisector of a pair: coefficients, samples or a mesh
    Bisector {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        p1: HeisPoint,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        p2: HeisPoint,
        #[arg(long, value_enum)]
        emit: Emit,
        /// Half-extents a,b,c of the box [-a,a]x[-b,b]x[-c,c]
        #[arg(long = "box", default_value = "3,3,6", value_parser = parse_box)]
        region: Aabb,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cells per axis
        #[arg(long, default_value_t = 96)]
        res: usize,
        #[arg(long, value_enum, default_value_t = Format::Obj)]
        format: Format,
    },
    /// Horizontal mean curvature over an (x, y) grid, as CSV
    Curvature {
        #[arg(long, value_enum)]
        surface: Surface,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        p1: Option<HeisPoint>,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        p2: Option<HeisPoint>,
        /// xmin,xmax,ymin,ymax,n
        #[arg(long, allow_hyphen_values = true, default_value = "-3,3,-3,3,301", value_parser = parse_grid)]
        grid: Grid2,
        /// Emit x,y,t,H at every surface point over the grid
        #[arg(long)]
        on_surface: bool,
        /// Height bound for on-surface points
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
    },
    /// Fit a spinal sphere to points read from a CSV file with header x,y,t
    Fit {
        #[arg(long)]
        input: std::path::PathBuf,
        /// Initial vertex: x,y,t or inf
        #[arg(long, allow_hyphen_values = true, value_parser = parse_boundary, requires = "v2_init")]
        v1_init: Option<BoundaryPoint>,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_boundary, requires = "v1_init")]
        v2_init: Option<BoundaryPoint>,
        #[arg(long, default_value_t = 10_000)]
        evaluations: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
    /// Run an invariant suite; exits nonzero iff an asserted check fails
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Poly,
    Samples,
    Mesh,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Obj,
    Ply,
}

#[derive(Clone, Copy, ValueEnum)]
enum Surface {
    Plane,
    S1,
    Bisector,
}

fn parse_reals(s: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(v)
}

fn parse_point(s: &str) -> std::result::Result<HeisPoint, String> {
    parse_reals(s, 3).map(|v| HeisPoint::new(v[0], v[1], v[2]))
}

fn parse_boundary(s: &str) -> std::result::Result<BoundaryPoint, String> {
    match s.trim() {
        "inf" | "infinity" => Ok(BoundaryPoint::Infinity),
        other => parse_point(other).map(BoundaryPoint::Finite),
    }
}

fn parse_box(s: &str) -> std::result::Result<Aabb, String> {
    let v = parse_reals(s, 3)?;
    Aabb::centered([v[0], v[1], v[2]]).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<Grid2, String> {
    let v = parse_reals(s, 5)?;
    if v[4].fract() != 0.0 || v[4] < 2.0 {
        return Err("grid size must be an integer >= 2".into());
    }
    Grid2::new(v[0], v[1], v[2], v[3], v[4] as usize).map_err(|e| e.to_string())
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("HEISBIS_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("HEISBIS_THREADS={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn require_pair(p1: Option<HeisPoint>, p2: Option<HeisPoint>) -> Result<(HeisPoint, HeisPoint)> {
    match (p1, p2) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::InvalidArgument("--surface bisector needs --p1 and --p2".into())),
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<ExitCode> {
    match cli.command {
        Command::Dist { p1, p2 } => writeln!(out, "{}", fmt_f64(dist_k(&p1, &p2)))?,
        Command::Normalize { p1, p2 } => {
            let n = normalize_pair(&p1, &p2)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&n).expect("serializable"))?;
        }
        Command::Bisector { p1, p2, emit, region, n, seed, res, format } => match emit {
            Emit::Poly => {
                let field = bisector_field(&p1, &p2)?;
                writeln!(out, "{}", serde_json::to_string_pretty(&field).expect("serializable"))?;
            }
            Emit::Samples => write_points_csv(&mut *out, &sample_bisector(&p1, &p2, &region, n, seed)?)?,
            Emit::Mesh => {
                let field = bisector_field(&p1, &p2)?;
                let mesh = marching_cubes(&field, &region, res)?.with_provenance(format!(
                    "Koranyi bisector of ({}, {}, {}) and ({}, {}, {}), box {:?}..{:?}, {res} cells per axis",
                    p1.x, p1.y, p1.t, p2.x, p2.y, p2.t, region.min, region.max
                ));
                let format = match format {
                    Format::Obj => MeshFormat::Obj,
                    Format::Ply => MeshFormat::Ply,
                };
                export_mesh(&mesh, format, &mut *out)?;
            }
        },
        Command::Curvature { surface, p1, p2, grid, on_surface, t_max } => match surface {
            Surface::S1 if !on_surface => write_grid_xy(&mut *out, &grid, s1_curvature)?,
            Surface::Plane if !on_surface => {
                let plane = plane_field();
                write_grid_xy(&mut *out, &grid, |x, y| mean_curvature(&plane, &HeisPoint::new(x, y, 0.0)))?
            }
            Surface::S1 => write_grid_on_surface(&mut *out, &s1_field(), &grid, t_max)?,
            Surface::Plane => write_grid_on_surface(&mut *out, &plane_field(), &grid, t_max)?,
            Surface::Bisector => {
                let (a, b) = require_pair(p1, p2)?;
                write_grid_on_surface(&mut *out, &bisector_field(&a, &b)?, &grid, t_max)?
            }
        },
        Command::Fit { input, v1_init, v2_init, evaluations, seed } => {
            let points = read_points_csv(std::fs::File::open(&input)?)?;
            let initial = v1_init.zip(v2_init);
            let opts = FitOptions { evaluations_per_start: evaluations, seed, ..Default::default() };
            let (_, report) = fit_spinal_report(&points, initial, &opts)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?;
            if !report.converged {
                eprintln!("heisbis: fit did not converge within {} evaluations", report.evaluations);
                return Ok(ExitCode::from(1));
            }
        }
        Command::Verify { suite, seed, samples } => {
            let report = run_verify(suite, seed, samples)?;
            writeln!(out, "{}", report.to_json())?;
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = configure_threads().and_then(|_| run(cli, &mut out));
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(code), Ok(())) => code,
        (Err(e), _) => {
            eprintln!("heisbis: {e}");
            ExitCode::from(2)
        }
        (_, Err(e)) => {
            eprintln!("heisbis: {e}");
            ExitCode::from(2)
        }
    }
}
