//! Argument handling and drivers behind the `selfception` binary.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use selfception::geometry::draw_ellipse_outlines;
use selfception::raster::{load_image, save_image};
use selfception::render::{base_layer, self_ception_detailed, Selfception};
use selfception::{Background, Error, FrameExport, RenderConfig, RgbImage, SlicParams};

/// Region-count targets and published MSE values for the two reference
/// photos. A preset sweep requests `k` equal to each target count; the
/// achieved count after connectivity cleanup lands within a few percent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub target_regions: &'static [usize],
    pub reference_mse: &'static [f64],
}

pub const CHELSEA: Preset = Preset {
    name: "chelsea",
    target_regions: &[532, 950, 1349],
    reference_mse: &[1235.97, 1111.39, 1044.12],
};

pub const COFFEE: Preset = Preset {
    name: "coffee",
    target_regions: &[485, 1057, 1406],
    reference_mse: &[3489.76, 3321.85, 3262.42],
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    Chelsea,
    Coffee,
}

impl PresetName {
    pub fn preset(self) -> Preset {
        match self {
            PresetName::Chelsea => CHELSEA,
            PresetName::Coffee => COFFEE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackgroundArg {
    SegmentMean,
    Original,
    Black,
}

impl From<BackgroundArg> for Background {
    fn from(b: BackgroundArg) -> Self {
        match b {
            BackgroundArg::SegmentMean => Background::SegmentMean,
            BackgroundArg::Original => Background::Original,
            BackgroundArg::Black => Background::Black,
        }
    }
}

/// Rebuild an image from resized, color-shifted copies of itself, one per
/// superpixel ellipse.
#[derive(Debug, Parser)]
#[command(name = "selfception", version, about)]
pub struct RunSpec {
    /// Input image (PNG or binary PPM).
    #[arg(long)]
    pub input: PathBuf,

    /// Output image (.png or .ppm). With several k values, `_k<k>` is
    /// appended to the file stem for each run.
    #[arg(long)]
    pub output: PathBuf,

    /// Requested region count; a comma-separated list runs a sweep.
    #[arg(long, value_delimiter = ',', required_unless_present = "paper_preset")]
    pub k: Vec<usize>,

    /// Sweep over the region counts published for a reference photo.
    #[arg(long, value_enum, conflicts_with = "k")]
    pub paper_preset: Option<PresetName>,

    /// SLIC compactness m (spatial vs color weight).
    #[arg(long, default_value_t = SlicParams::DEFAULT_COMPACTNESS)]
    pub compactness: f64,

    /// SLIC iterations.
    #[arg(long, default_value_t = SlicParams::DEFAULT_ITERATIONS)]
    pub iterations: usize,

    /// Components smaller than this fraction of S² are merged away.
    #[arg(long, default_value_t = SlicParams::DEFAULT_MIN_REGION_FRACTION)]
    pub min_region_fraction: f64,

    /// Rotate every tile to its ellipse's orientation.
    #[arg(long)]
    pub rotated: bool,

    /// Do not clamp color-shifted tiles to [0, 255] before compositing.
    #[arg(long)]
    pub no_clip: bool,

    /// What lies under and between the ellipses.
    #[arg(long, value_enum, default_value_t = BackgroundArg::SegmentMean)]
    pub background: BackgroundArg,

    /// Directory for `frame_NNNNNN.png` snapshots while painting.
    #[arg(long)]
    pub frames: Option<PathBuf>,

    /// Regions painted between two frames.
    #[arg(long, default_value_t = 10)]
    pub frame_stride: usize,

    /// CSV report: requested_k,achieved_regions,mse,elapsed_ms.
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Write elapsed_ms as 0 so reports are reproducible byte for byte.
    #[arg(long)]
    pub no_timings: bool,

    /// Also write `<output>.labels.bin` and `<output>.segments.png`.
    #[arg(long)]
    pub dump_labels: bool,

    /// Also write `<output>.ellipses.png` with the fitted ellipses outlined.
    #[arg(long)]
    pub dump_ellipses: bool,
}

/// CLI failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Param(_) => 2,
            _ => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn param(msg: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: format!("invalid parameter: {}", msg.into()),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError {
        code: 1,
        message: format!("{}: {e}", path.display()),
    }
}

/// One finished pipeline run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRow {
    pub requested_k: usize,
    pub achieved_regions: usize,
    pub mse: f64,
    pub elapsed_ms: f64,
}

impl RunSpec {
    /// The requested k values, sorted ascending without duplicates.
    pub fn k_values(&self) -> Vec<usize> {
        let mut ks = match self.paper_preset {
            Some(p) => p.preset().target_regions.to_vec(),
            None => self.k.clone(),
        };
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    pub fn slic_params(&self, k: usize) -> SlicParams {
        SlicParams {
            target_regions: k,
            compactness: self.compactness,
            iterations: self.iterations,
            min_region_fraction: self.min_region_fraction,
        }
    }

    pub fn render_config(&self, frames_dir: Option<PathBuf>) -> RenderConfig {
        RenderConfig {
            rotated_tiles: self.rotated,
            clip_output: !self.no_clip,
            background: self.background.into(),
            frames: frames_dir.map(|dir| FrameExport {
                dir,
                stride: self.frame_stride,
            }),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let ks = self.k_values();
        if ks.is_empty() {
            return Err(param("at least one k value is required"));
        }
        if ks.contains(&0) {
            return Err(param("k must be at least 1"));
        }
        if self.frame_stride == 0 {
            return Err(param("--frame-stride must be at least 1"));
        }
        if self.output.as_os_str().is_empty() || self.input.as_os_str().is_empty() {
            return Err(param("input and output paths must be non-empty"));
        }
        Ok(())
    }
}

/// Dispatches to [`run_single`] or [`run_sweep`] depending on how many
/// distinct k values were requested.
pub fn run(spec: &RunSpec) -> Result<Vec<RunRow>, CliError> {
    spec.validate()?;
    if spec.k_values().len() == 1 {
        run_single(spec).map(|row| vec![row])
    } else {
        run_sweep(spec)
    }
}

pub fn run_single(spec: &RunSpec) -> Result<RunRow, CliError> {
    spec.validate()?;
    let k = spec.k_values()[0];
    let img = load_image(&spec.input)?;
    let mut report = open_report(spec)?;
    let row = run_one(spec, &img, k, &spec.output, spec.frames.clone())?;
    if let Some((writer, path)) = report.as_mut() {
        write_row(writer, path, &row, spec.no_timings)?;
    }
    Ok(row)
}

/// Runs every k in ascending order, one output image per k. Report rows are
/// flushed as soon as each run finishes.
pub fn run_sweep(spec: &RunSpec) -> Result<Vec<RunRow>, CliError> {
    spec.validate()?;
    let ks = spec.k_values();
    if ks.len() < 2 {
        return Err(param("a sweep needs at least two distinct k values"));
    }
    let img = load_image(&spec.input)?;
    let mut report = open_report(spec)?;
    let mut rows = Vec::with_capacity(ks.len());
    for k in ks {
        let output = suffixed(&spec.output, &format!("_k{k}"));
        let frames = spec.frames.as_ref().map(|d| d.join(format!("k{k}")));
        let row = run_one(spec, &img, k, &output, frames)?;
        if let Some((writer, path)) = report.as_mut() {
            write_row(writer, path, &row, spec.no_timings)?;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn run_one(
    spec: &RunSpec,
    img: &RgbImage,
    k: usize,
    output: &Path,
    frames: Option<PathBuf>,
) -> Result<RunRow, CliError> {
    if let Some(dir) = &frames {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
    }
    let run = self_ception_detailed(img, &spec.slic_params(k), &spec.render_config(frames))?;
    save_image(&run.output, output)?;
    if spec.dump_labels {
        dump_labels(img, &run, output)?;
    }
    if spec.dump_ellipses {
        let overlay = draw_ellipse_outlines(img, &run.ellipses, [255, 0, 0]);
        save_image(&overlay, suffixed_ext(output, "ellipses.png"))?;
    }
    let row = RunRow {
        requested_k: k,
        achieved_regions: run.report.achieved_regions,
        mse: run.report.mse,
        elapsed_ms: run.report.timings.total_ms(),
    };
    println!("regions={} mse={:.2}", row.achieved_regions, row.mse);
    Ok(row)
}

fn dump_labels(img: &RgbImage, run: &Selfception, output: &Path) -> Result<(), CliError> {
    let raw_path = suffixed_ext(output, "labels.bin");
    File::create(&raw_path)
        .and_then(|mut f| f.write_all(&run.labels.to_le_bytes()))
        .map_err(|e| Error::Io {
            path: raw_path.clone(),
            source: e,
        })?;
    let segments = base_layer(img, &run.labels, &run.stats, Background::SegmentMean)?;
    save_image(&segments.convert(), suffixed_ext(output, "segments.png"))?;
    Ok(())
}

type Report = (csv::Writer<File>, PathBuf);

fn open_report(spec: &RunSpec) -> Result<Option<Report>, CliError> {
    let Some(path) = &spec.report else {
        return Ok(None);
    };
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    writer
        .write_record(["requested_k", "achieved_regions", "mse", "elapsed_ms"])
        .and_then(|_| writer.flush().map_err(csv::Error::from))
        .map_err(|e| csv_error(path, e))?;
    Ok(Some((writer, path.clone())))
}

fn write_row(
    writer: &mut csv::Writer<File>,
    path: &Path,
    row: &RunRow,
    no_timings: bool,
) -> Result<(), CliError> {
    let elapsed = if no_timings { 0.0 } else { row.elapsed_ms };
    writer
        .write_record([
            row.requested_k.to_string(),
            row.achieved_regions.to_string(),
            format!("{:.4}", row.mse),
            format!("{elapsed:.0}"),
        ])
        .and_then(|_| writer.flush().map_err(csv::Error::from))
        .map_err(|e| csv_error(path, e))
}

/// `out.png` + `_k600` → `out_k600.png`.
pub fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

/// `out.png` + `labels.bin` → `out.labels.bin`.
pub fn suffixed_ext(path: &Path, ext: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.{ext}"))
}

/// Parses `args`, runs, and maps failures to exit codes (1 for I/O and
/// format errors, 2 for bad parameters).
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let spec = match RunSpec::try_parse_from(args) {
        Ok(spec) => spec,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&spec) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("selfception: {e}");
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_name_suffixes() {
        assert_eq!(suffixed(Path::new("a/out.png"), "_k600"), PathBuf::from("a/out_k600.png"));
        assert_eq!(suffixed_ext(Path::new("out.png"), "labels.bin"), PathBuf::from("out.labels.bin"));
    }

    #[test]
    fn k_list_parsing_and_preset() {
        let spec = RunSpec::try_parse_from(["x", "--input", "i.png", "--output", "o.png", "--k", "900,300,300"])
            .unwrap();
        assert_eq!(spec.k_values(), vec![300, 900]);
        let spec = RunSpec::try_parse_from(["x", "--input", "i.png", "--output", "o.png", "--paper-preset", "coffee"])
            .unwrap();
        assert_eq!(spec.k_values(), COFFEE.target_regions.to_vec());
        assert!(RunSpec::try_parse_from(["x", "--input", "i", "--output", "o"]).is_err());
        assert!(RunSpec::try_parse_from([
            "x", "--input", "i", "--output", "o", "--k", "5", "--paper-preset", "chelsea"
        ])
        .is_err());
    }

    #[test]
    fn defaults_match_library() {
        let spec = RunSpec::try_parse_from(["x", "--input", "i.png", "--output", "o.png", "--k", "10"]).unwrap();
        assert_eq!(spec.slic_params(10), SlicParams::new(10));
        assert_eq!(spec.render_config(None), RenderConfig::default());
    }

    #[test]
    fn zero_k_is_a_parameter_error() {
        let spec = RunSpec::try_parse_from(["x", "--input", "i.png", "--output", "o.png", "--k", "0"]).unwrap();
        assert_eq!(run(&spec).unwrap_err().code, 2);
    }
}
