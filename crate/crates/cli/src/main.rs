use std::error::Error as StdError;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fhtskew_core::detector::deskew_by;
use fhtskew_core::eval::{
    error_histogram, evaluate_entries, read_manifest, write_manifest, ManifestEntry,
};
use fhtskew_core::{
    compute_metrics, detect_skew, fht, horizontal_derivative, load_image, pad_to_dyadic,
    save_image, synth_document, time_transforms, vertical_derivative, DetectorConfig, Orientation,
    SlopeSign,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type CliResult = Result<(), Box<dyn StdError + Send + Sync>>;

/// Document skew detection with the fast Hough transform.
///
/// Angles are in degrees; a positive angle means text lines descend to the
/// right (rows grow with x).
#[derive(Parser)]
#[command(name = "fhtskew", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the skew angle of one image.
    Detect {
        image: PathBuf,
        /// Half-width of the search window in degrees.
        #[arg(long, default_value_t = 15.0)]
        max_angle: f64,
        /// Score the mostly-horizontal channel only.
        #[arg(long)]
        no_vertical: bool,
        /// Print a JSON object instead of the bare angle.
        #[arg(long)]
        json: bool,
    },
    /// Rotate an image so its text lines are horizontal.
    Deskew {
        input: PathBuf,
        output: PathBuf,
        /// Known skew in degrees; detected when absent.
        #[arg(long, allow_hyphen_values = true)]
        angle: Option<f64>,
    },
    /// Run detection over a manifest and write a metrics report.
    Evaluate {
        #[arg(long)]
        images: PathBuf,
        /// Lines of `filename,group_id,gt_angle_deg`; `#` starts a comment.
        #[arg(long)]
        manifest: PathBuf,
        /// Error bound in degrees for the correct-estimation rate.
        #[arg(long, default_value_t = 0.1)]
        threshold: f64,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Directory for per-image `tangent value` criterion profiles.
        #[arg(long)]
        profiles: Option<PathBuf>,
        /// Two-column `lower_edge count` histogram of absolute errors.
        #[arg(long)]
        histogram: Option<PathBuf>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Generate synthetic skewed pages with a matching manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 512)]
        size: usize,
        /// Angles are drawn uniformly from [-max_angle, max_angle].
        #[arg(long, default_value_t = 15.0)]
        max_angle: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skewed copies rendered from each page layout; copies share a group.
        #[arg(long, default_value_t = 1)]
        per_group: usize,
    },
    /// Time the four transform passes against rotate-and-project.
    Bench {
        #[arg(long, default_value_t = 1024)]
        size: usize,
        #[arg(long, default_value_t = 9)]
        repeats: usize,
    },
    /// Write one transform accumulator as a 16-bit PGM.
    FhtDump {
        image: PathBuf,
        /// `h` (mostly horizontal) or `v` (mostly vertical).
        #[arg(long)]
        orientation: Orientation,
        /// `+` or `-`.
        #[arg(long, allow_hyphen_values = true)]
        sign: SlopeSign,
        #[arg(long)]
        out: PathBuf,
        /// Transform the padded image itself rather than its derivative.
        #[arg(long)]
        raw: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Detect {
            image,
            max_angle,
            no_vertical,
            json,
        } => detect(&image, max_angle, no_vertical, json),
        Command::Deskew {
            input,
            output,
            angle,
        } => deskew(&input, &output, angle),
        Command::Evaluate {
            images,
            manifest,
            threshold,
            report,
            profiles,
            histogram,
            jobs,
        } => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.unwrap_or(0))
                .build()?;
            pool.install(|| {
                evaluate(
                    &images,
                    &manifest,
                    threshold,
                    report.as_deref(),
                    profiles.as_deref(),
                    histogram.as_deref(),
                )
            })
        }
        Command::Synth {
            out,
            count,
            size,
            max_angle,
            seed,
            per_group,
        } => synth(&out, count, size, max_angle, seed, per_group),
        Command::Bench { size, repeats } => {
            println!("{}", time_transforms(size, repeats)?);
            Ok(())
        }
        Command::FhtDump {
            image,
            orientation,
            sign,
            out,
            raw,
        } => fht_dump(&image, orientation, sign, &out, raw),
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()).into())
}

fn detect(image: &Path, max_angle: f64, no_vertical: bool, json: bool) -> CliResult {
    let cfg = DetectorConfig {
        max_angle,
        use_vertical: !no_vertical,
        ..Default::default()
    };
    let est = detect_skew(&load_image(image)?, &cfg)?;
    if json {
        let obj = serde_json::json!({ "angle": est.angle, "peak_value": est.peak_value });
        println!("{obj}");
    } else {
        println!("{:.6}", est.angle);
    }
    Ok(())
}

fn deskew(input: &Path, output: &Path, angle: Option<f64>) -> CliResult {
    let img = load_image(input)?;
    let angle = match angle {
        Some(a) if a.is_finite() => a,
        Some(a) => return Err(format!("angle {a} is not finite").into()),
        None => detect_skew(&img, &DetectorConfig::default())?.angle,
    };
    save_image(&deskew_by(&img, angle), output)?;
    Ok(())
}

fn evaluate(
    images: &Path,
    manifest: &Path,
    threshold: f64,
    report: Option<&Path>,
    profiles: Option<&Path>,
    histogram: Option<&Path>,
) -> CliResult {
    let entries = read_manifest(manifest)?;
    let evaluated = evaluate_entries(images, &entries, &DetectorConfig::default())?;
    let records: Vec<_> = evaluated.iter().map(|e| e.record.clone()).collect();
    let metrics = compute_metrics(&records, threshold)?;

    let mut doc = serde_json::to_value(&metrics)?;
    doc["records"] = serde_json::to_value(&records)?;
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match report {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }

    if let Some(dir) = profiles {
        fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        for e in &evaluated {
            let name = Path::new(&e.record.filename)
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| e.record.filename.clone());
            write_file(
                &dir.join(format!("{name}.profile.txt")),
                &e.estimate.profile.to_two_column(),
            )?;
        }
    }
    if let Some(path) = histogram {
        let text: String = error_histogram(&records, 0.05)
            .into_iter()
            .map(|(edge, count)| format!("{edge:.2} {count}\n"))
            .collect();
        write_file(path, &text)?;
    }
    if report.is_some() {
        eprintln!(
            "{} images: AED {:.6}, TOP80 {:.6}, CE {:.2}%",
            metrics.count, metrics.aed, metrics.top80, metrics.ce
        );
    }
    Ok(())
}

fn synth(
    out: &Path,
    count: usize,
    size: usize,
    max_angle: f64,
    seed: u64,
    per_group: usize,
) -> CliResult {
    if !(0.0..=20.0).contains(&max_angle) {
        return Err(format!("max angle {max_angle} is outside [0, 20]").into());
    }
    if per_group == 0 {
        return Err("per-group must be at least 1".into());
    }
    fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(count);
    for i in 0..count {
        let group = i / per_group;
        // round first so the manifest holds the exact rendered angle
        let angle = (rng.gen_range(-max_angle..=max_angle) * 1e6).round() / 1e6;
        let layout_seed = seed.wrapping_mul(1_000_003).wrapping_add(group as u64);
        let (img, gt) = synth_document(size, angle, layout_seed)?;
        let filename = format!("synth_{i:05}.png");
        save_image(&img, out.join(&filename))?;
        entries.push(ManifestEntry {
            filename,
            group_id: group.to_string(),
            gt_angle: gt,
        });
    }
    write_manifest(out.join("manifest.csv"), &entries)?;
    Ok(())
}

fn fht_dump(
    image: &Path,
    orientation: Orientation,
    sign: SlopeSign,
    out: &Path,
    raw: bool,
) -> CliResult {
    let img = load_image(image)?;
    let input = match (raw, orientation) {
        (true, _) => img,
        (false, Orientation::MostlyHorizontal) => horizontal_derivative(&img)?,
        (false, Orientation::MostlyVertical) => vertical_derivative(&img)?,
    };
    fht(&pad_to_dyadic(&input), orientation, sign)?.save_pgm16(out)?;
    Ok(())
}
