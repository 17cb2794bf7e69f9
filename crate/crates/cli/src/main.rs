use clap::{Parser, Subcommand, ValueEnum};
use fanbeam_tt::boundary::{project_range_i0, project_range_iperp_core, project_vpm, Sign};
use fanbeam_tt::consistency::moment_conditions_order;
use fanbeam_tt::fiber::analyze;
use fanbeam_tt::forward::{xray, QuadratureSpec};
use fanbeam_tt::io::{self, Channel};
use fanbeam_tt::phantoms::experiment_preset;
use fanbeam_tt::recon::{reconstruct_even, reconstruct_odd, ReconstructionConfig, SideMethod};
use fanbeam_tt::{Basis, DiskImage, Error, ImageGrid, SinoGrid, Sinogram, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fbtt",
    version,
    about = "Fan-beam tensor tomography on the unit disk"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RangeArg {
    I0,
    IperpCore,
    #[value(name = "v+")]
    VPlus,
    #[value(name = "v-")]
    VMinus,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L2,
    Linf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    Re,
    Im,
    Abs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Series,
    Cauchy,
}

#[derive(Subcommand)]
enum Command {
    /// Write one of the experiment presets as a tensor field.
    Phantom {
        #[arg(long)]
        preset: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 300)]
        nx: usize,
        #[arg(long, default_value_t = 300)]
        ny: usize,
        /// Also write the scalar potential (preset 2).
        #[arg(long)]
        potential: Option<PathBuf>,
    },
    /// X-ray transform of a tensor field.
    Forward {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 600)]
        nbeta: usize,
        #[arg(long, default_value_t = 300)]
        nalpha: usize,
        /// Standard deviation of additive gaussian noise.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Chord samples per unit length (default: 2 max(nx, ny)).
        #[arg(long)]
        spu: Option<f64>,
    },
    /// Reconstruct a tensor field of the given order from data.
    Reconstruct {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        order: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.97)]
        rcut: f64,
        /// Output image size (default: nalpha).
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long, value_enum, default_value_t = MethodArg::Series)]
        method: MethodArg,
        /// Symmetrize data before the side-harmonic integrals.
        #[arg(long)]
        half_sum: bool,
        /// For odd orders, also write the reconstructed scalar potential.
        #[arg(long)]
        potential: Option<PathBuf>,
    },
    /// Project data onto a range or symmetry subspace.
    Project {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        range: RangeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Moment-condition test; exits with status 1 when it fails.
    Moments {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        nmax: u32,
        #[arg(long)]
        kmax: u32,
        /// Tensor order the data come from.
        #[arg(long, default_value_t = 0)]
        order: u32,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// CSV report path, or `-` for stdout.
        #[arg(long)]
        report: Option<String>,
    },
    /// Coefficients of data in one of the bases, as CSV.
    Coeffs {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        basis: String,
        /// Output path, or `-` for stdout.
        #[arg(long)]
        out: String,
    },
    /// Distance between two sinograms or two images.
    Diff {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = NormArg::L2)]
        norm: NormArg,
        /// Report path, or `-` for stdout.
        #[arg(long, default_value = "-")]
        report: String,
    },
    /// Render a sinogram or image as a 16-bit PGM with a min/max sidecar.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ChannelArg::Abs)]
        channel: ChannelArg,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Consistency,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn emit(target: &str, text: &str) -> Result<(), Failure> {
    if target == "-" {
        match std::io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            r => r?,
        }
    } else {
        std::fs::write(target, text)?;
    }
    Ok(())
}

enum Loaded {
    Sinogram(Sinogram),
    Image(DiskImage),
}

fn load_2d(path: &Path) -> Result<Loaded, Error> {
    let buf = std::fs::read(path)?;
    if buf.starts_with(b"FBSG1\n") {
        Ok(Loaded::Sinogram(io::decode_sinogram(&buf)?))
    } else if buf.starts_with(b"DIMG1\n") {
        Ok(Loaded::Image(io::decode_image(&buf)?))
    } else {
        Err(Error::Format(format!(
            "{}: not a sinogram or image file",
            path.display()
        )))
    }
}

fn add_noise(d: &Sinogram, sigma: f64, seed: u64) -> Result<Sinogram, Error> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise must be a finite non-negative number, got {sigma}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let real = d.values().iter().all(|v| v.im == 0.0);
    // complex noise splits the variance between the two parts
    let s = if real { sigma } else { sigma / 2f64.sqrt() };
    let normal = Normal::new(0.0, s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let values = d
        .values()
        .iter()
        .map(|&v| {
            let re = normal.sample(&mut rng);
            let im = if real { 0.0 } else { normal.sample(&mut rng) };
            v + C64::new(re, im)
        })
        .collect();
    Sinogram::from_values(d.grid(), values)
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Phantom {
            preset,
            out,
            nx,
            ny,
            potential,
        } => {
            let grid = ImageGrid::new(nx, ny, 1.0)?;
            let p = experiment_preset(preset, grid)?;
            io::write_tensor(&p.tensor, &out)?;
            if let Some(path) = potential {
                let pot = p.potential.ok_or_else(|| {
                    Error::InvalidArgument(format!("preset {preset} has no scalar potential"))
                })?;
                io::write_image(&pot, path)?;
            }
        }
        Command::Forward {
            input,
            out,
            nbeta,
            nalpha,
            noise,
            seed,
            spu,
        } => {
            let t = io::read_tensor(&input)?;
            let grid = SinoGrid::new(nbeta, nalpha)?;
            let quad = match spu {
                Some(s) => QuadratureSpec::new(s, t.grid())?,
                None => QuadratureSpec::default_for(t.grid()),
            };
            let mut d = xray(&t, grid, &quad);
            if let Some(sigma) = noise {
                d = add_noise(&d, sigma, seed)?;
            }
            io::write_sinogram(&d, &out)?;
        }
        Command::Reconstruct {
            input,
            order,
            out,
            rcut,
            nx,
            ny,
            method,
            half_sum,
            potential,
        } => {
            let d = io::read_sinogram(&input)?;
            let nx = nx.unwrap_or(d.nalpha());
            let grid = ImageGrid::new(nx, ny.unwrap_or(nx), 1.0)?;
            let mut cfg = ReconstructionConfig::new(grid)
                .with_r_cut(rcut)?
                .with_method(match method {
                    MethodArg::Series => SideMethod::PowerSeries,
                    MethodArg::Cauchy => SideMethod::Cauchy,
                });
            cfg.half_sum = half_sum;
            if order % 2 == 0 {
                if potential.is_some() {
                    return Err(Error::InvalidArgument(
                        "--potential applies to odd orders only".into(),
                    )
                    .into());
                }
                io::write_tensor(&reconstruct_even(&d, order / 2, &cfg), &out)?;
            } else {
                let r = reconstruct_odd(&d, order / 2, &cfg);
                io::write_tensor(&r.tensor, &out)?;
                if let Some(path) = potential {
                    io::write_image(&r.potential(), path)?;
                }
            }
        }
        Command::Project { input, range, out } => {
            let d = io::read_sinogram(&input)?;
            let p = match range {
                RangeArg::I0 => project_range_i0(&d),
                RangeArg::IperpCore => project_range_iperp_core(&d),
                RangeArg::VPlus => project_vpm(&d, Sign::Plus),
                RangeArg::VMinus => project_vpm(&d, Sign::Minus),
            };
            io::write_sinogram(&p, &out)?;
        }
        Command::Moments {
            input,
            nmax,
            kmax,
            order,
            tol,
            report,
        } => {
            let d = io::read_sinogram(&input)?;
            let r = moment_conditions_order(&d, order, nmax, kmax, tol)?;
            if let Some(target) = report {
                emit(&target, &r.to_csv())?;
            }
            eprintln!(
                "moments: max residual {:.3e}, tolerance {:.1e}: {}",
                r.max_residual,
                tol,
                if r.pass { "pass" } else { "fail" }
            );
            if !r.pass {
                return Err(Failure::Consistency);
            }
        }
        Command::Coeffs { input, basis, out } => {
            let d = io::read_sinogram(&input)?;
            let basis = Basis::parse(&basis)?;
            emit(&out, &io::coeffs_csv(&analyze(&d, basis)))?;
        }
        Command::Diff { a, b, norm, report } => {
            let (abs, base) = match (load_2d(&a)?, load_2d(&b)?) {
                (Loaded::Sinogram(x), Loaded::Sinogram(y)) => {
                    let diff = x.sub(&y)?;
                    match norm {
                        NormArg::L2 => (diff.norm(), x.norm()),
                        NormArg::Linf => (diff.max_abs(), x.max_abs()),
                    }
                }
                (Loaded::Image(x), Loaded::Image(y)) => {
                    let diff = x.sub(&y)?;
                    match norm {
                        NormArg::L2 => (diff.norm_sq().sqrt(), x.norm_sq().sqrt()),
                        NormArg::Linf => (diff.max_abs(), x.max_abs()),
                    }
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "diff needs two files of the same kind".into(),
                    )
                    .into())
                }
            };
            let rel = if base == 0.0 {
                if abs == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                abs / base
            };
            let name = match norm {
                NormArg::L2 => "l2",
                NormArg::Linf => "linf",
            };
            emit(
                &report,
                &format!("norm,absolute,relative\n{name},{abs:.16e},{rel:.16e}\n"),
            )?;
        }
        Command::Render {
            input,
            channel,
            out,
        } => {
            let channel = match channel {
                ChannelArg::Re => Channel::Re,
                ChannelArg::Im => Channel::Im,
                ChannelArg::Abs => Channel::Abs,
            };
            let raster = match load_2d(&input)? {
                Loaded::Sinogram(s) => io::rasterize_sinogram(&s, channel)?,
                Loaded::Image(img) => io::rasterize_image(&img, channel)?,
            };
            io::write_pgm(&raster, channel, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Consistency) => ExitCode::from(1),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) | Error::OutOfRange(_) => ExitCode::from(2),
                Error::Io(_) | Error::Format(_) | Error::Validation(_) => ExitCode::from(3),
            }
        }
    }
}
