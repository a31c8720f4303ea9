use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use tilde_core::anova::{anova_nested, anova_single};
use tilde_core::expr::parse_model;
use tilde_core::infer::{coefficient_table, fit, predict, r_squared, FitResult, Interval};
use tilde_core::stepwise::{stepwise, Direction, Metric};
use tilde_core::table::{DataTable, ReadOptions};

use crate::plot::{choose_plot, partial_regression_plot, residual_panels, residual_plot, Band, PlotOptions};
use crate::svg::render_svg;
use crate::{io_error, model_file, write_atomic, write_json, CliError, Result};

#[derive(Parser, Debug)]
#[command(name = "tilde", version, about = "Formula-driven linear regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model and print its coefficient table
    Fit(FitArgs),
    /// Predict from a saved model
    Predict(PredictArgs),
    /// F-tests for one model, or a nested comparison of two
    Anova(AnovaArgs),
    /// Forward or backward term selection
    Stepwise(StepwiseArgs),
    /// Plot a fitted model
    Plot(PlotArgs),
    /// Residual diagnostic plots
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Delimited text file with a header row
    #[arg(long)]
    data: PathBuf,
    /// Field delimiter: a single character, or `tab`
    #[arg(long, default_value = ",")]
    delimiter: String,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    input: DataArgs,
    /// Model formula, e.g. "Log(SalePrice) ~ SqFt + C(Style)"
    #[arg(long)]
    formula: String,
    /// Error rate for the coefficient confidence intervals
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Where to save the fitted model
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
    /// Also write the coefficient table as JSON
    #[arg(long)]
    table_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Saved model file from `tilde fit`
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    input: DataArgs,
    /// Add confidence bounds with this error rate
    #[arg(long, value_name = "ALPHA", conflicts_with = "prediction_interval")]
    confidence_interval: Option<f64>,
    /// Add prediction bounds with this error rate
    #[arg(long, value_name = "ALPHA")]
    prediction_interval: Option<f64>,
    /// Also write the predictions as delimited text
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnovaArgs {
    /// Full model file
    full: PathBuf,
    /// Reduced model file for a nested comparison
    reduced: Option<PathBuf>,
    /// Also write the table as JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MetricArg {
    Aic,
    Bic,
    #[value(name = "r2-adj")]
    R2Adj,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DirectionArg {
    Forward,
    Backward,
}

#[derive(Args, Debug)]
struct StepwiseArgs {
    #[command(flatten)]
    input: DataArgs,
    /// Full model whose terms are the candidates
    #[arg(long)]
    formula: String,
    #[arg(long, value_enum, default_value = "bic")]
    metric: MetricArg,
    #[arg(long, value_enum, default_value = "forward")]
    direction: DirectionArg,
    /// Only consider models that keep every lower-order part of each term
    #[arg(long)]
    hierarchy: bool,
    /// Write the search trace as JSON
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Fit the selected model and save it here
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Saved model file from `tilde fit`
    #[arg(long)]
    model: PathBuf,
    /// Draw a confidence band with this error rate
    #[arg(long, value_name = "ALPHA", conflicts_with = "prediction_band")]
    confidence_band: Option<f64>,
    /// Draw a prediction band with this error rate
    #[arg(long, value_name = "ALPHA")]
    prediction_band: Option<f64>,
    /// Quantitative variable for the x-axis when the model has several
    #[arg(long)]
    x_var: Option<String>,
    /// Show the model's response scale next to the original one
    #[arg(long)]
    transformed_y_space: bool,
    /// SVG output; the plot data goes beside it with a .json extension
    #[arg(long, default_value = "plot.svg")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    /// Saved model file from `tilde fit`
    #[arg(long)]
    model: PathBuf,
    /// Directory for the SVG and data files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

/// Parses `args` (program name first) and runs the command, printing to the
/// process's stdout and stderr. Returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if matches!(e, CliError::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Fit(a) => cmd_fit(a, out),
        Command::Predict(a) => cmd_predict(a, out),
        Command::Anova(a) => cmd_anova(a, out),
        Command::Stepwise(a) => cmd_stepwise(a, out),
        Command::Plot(a) => cmd_plot(a, out, err),
        Command::Diagnose(a) => cmd_diagnose(a, out),
    }
}

fn print(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| io_error(Path::new("<stdout>"), e))
}

fn read_data(a: &DataArgs) -> Result<DataTable> {
    let delimiter = match a.delimiter.as_str() {
        "tab" | "\\t" | "\t" => b'\t',
        d if d.len() == 1 => d.as_bytes()[0],
        d => return Err(CliError::Usage(format!("delimiter must be one character or `tab`, got `{d}`"))),
    };
    Ok(DataTable::read_delimited(&a.data, ReadOptions { delimiter })?)
}

fn check_alpha(name: &str, alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(CliError::Usage(format!("{name} must be strictly between 0 and 1, got {alpha}")))
    }
}

fn fit_summary(f: &FitResult) -> String {
    let mut s = format!("n = {}, residual df = {}", f.n(), f.df_resid());
    if f.dropped_rows() > 0 {
        s.push_str(&format!(" ({} rows with missing values dropped)", f.dropped_rows()));
    }
    s.push('\n');
    match (r_squared(f, false), r_squared(f, true)) {
        (Ok(r2), Ok(adj)) => {
            s.push_str(&format!("R-squared = {r2:.6}, adjusted R-squared = {adj:.6}\n"));
            if !f.spec().has_intercept() {
                s.push_str("note: no intercept, so R-squared is computed about zero rather than the mean\n");
            }
        }
        (Err(e), _) | (_, Err(e)) => s.push_str(&format!("R-squared undefined: {e}\n")),
    }
    s
}

fn cmd_fit(a: FitArgs, out: &mut dyn Write) -> Result<()> {
    let alpha = check_alpha("--alpha", a.alpha)?;
    let data = read_data(&a.input)?;
    let spec = parse_model(&a.formula)?;
    let f = fit(&spec, &data)?;
    let table = coefficient_table(&f, alpha)?;
    print(out, &format!("{}\n\n{}\n{}", f.spec(), table.render_text(), fit_summary(&f)))?;
    model_file::save(&f, &a.out)?;
    if let Some(path) = &a.table_out {
        write_json(path, &table)?;
    }
    print(out, &format!("model saved to {}\n", a.out.display()))
}

fn cmd_predict(a: PredictArgs, out: &mut dyn Write) -> Result<()> {
    let f = model_file::load(&a.model)?;
    let data = read_data(&a.input)?;
    let interval = match (a.confidence_interval, a.prediction_interval) {
        (Some(c), _) => Interval::Confidence(check_alpha("--confidence-interval", c)?),
        (_, Some(p)) => Interval::Prediction(check_alpha("--prediction-interval", p)?),
        _ => Interval::None,
    };
    let p = predict(&f, &data, interval)?;
    print(out, &p.render_text())?;
    if let Some(path) = &a.out {
        let mut text = String::from("predicted,lower,upper\n");
        for r in &p.rows {
            let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            text.push_str(&format!("{},{},{}\n", r.fit, cell(r.lower), cell(r.upper)));
        }
        write_atomic(path, text.as_bytes())?;
    }
    Ok(())
}

fn cmd_anova(a: AnovaArgs, out: &mut dyn Write) -> Result<()> {
    let full = model_file::load(&a.full)?;
    let table = match &a.reduced {
        Some(path) => anova_nested(&full, &model_file::load(path)?)?,
        None => anova_single(&full)?,
    };
    print(out, &table.render_text())?;
    if let Some(path) = &a.out {
        write_json(path, &table)?;
    }
    Ok(())
}

fn cmd_stepwise(a: StepwiseArgs, out: &mut dyn Write) -> Result<()> {
    let data = read_data(&a.input)?;
    let spec = parse_model(&a.formula)?;
    let metric = match a.metric {
        MetricArg::Aic => Metric::Aic,
        MetricArg::Bic => Metric::Bic,
        MetricArg::R2Adj => Metric::AdjR2,
    };
    let direction = match a.direction {
        DirectionArg::Forward => Direction::Forward,
        DirectionArg::Backward => Direction::Backward,
    };
    let result = stepwise(&spec, &data, metric, direction, a.hierarchy)?;
    print(out, &result.render_text())?;
    if let Some(path) = &a.trace_out {
        write_json(path, &result)?;
    }
    if let Some(path) = &a.model_out {
        let f = fit(&result.best_model, &data)?;
        model_file::save(&f, path)?;
        print(out, &format!("model saved to {}\n", path.display()))?;
    }
    Ok(())
}

fn cmd_plot(a: PlotArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let f = model_file::load(&a.model)?;
    let band = match (a.confidence_band, a.prediction_band) {
        (Some(c), _) => Some(Band::Confidence(check_alpha("--confidence-band", c)?)),
        (_, Some(p)) => Some(Band::Prediction(check_alpha("--prediction-band", p)?)),
        _ => None,
    };
    let options = PlotOptions {
        band,
        x_var: a.x_var,
        transformed_y_space: a.transformed_y_space,
    };
    let spec = choose_plot(&f, &options)?;
    for w in &spec.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let data = render_svg(&spec, &a.out)?;
    print(out, &format!("wrote {} and {}\n", a.out.display(), data.display()))
}

/// File-name friendly version of a column label.
fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    let s = s.trim_matches('_').to_string();
    let mut out = String::new();
    for c in s.chars() {
        if !(c == '_' && out.ends_with('_')) {
            out.push(c);
        }
    }
    out
}

fn cmd_diagnose(a: DiagnoseArgs, out: &mut dyn Write) -> Result<()> {
    let f = model_file::load(&a.model)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| io_error(&a.out_dir, e))?;
    let mut written = Vec::new();
    let path = a.out_dir.join("residuals.svg");
    render_svg(&residual_panels(&f)?, &path)?;
    written.push(path);

    let quantitative: Vec<String> = f
        .spec()
        .explanatory()
        .variable_names()
        .into_iter()
        .filter(|v| f.encoding().categorical(v).is_none())
        .collect();
    for v in &quantitative {
        let path = a.out_dir.join(format!("residual_vs_{}.svg", slug(v)));
        render_svg(&residual_plot(&f, v)?, &path)?;
        written.push(path);
    }
    for (k, label) in f.labels().iter().enumerate() {
        if f.design().intercept() == Some(k) {
            continue;
        }
        let path = a.out_dir.join(format!("partial_{:02}_{}.svg", k, slug(label)));
        render_svg(&partial_regression_plot(&f, label)?, &path)?;
        written.push(path);
    }
    for p in written {
        print(out, &format!("wrote {}\n", p.display()))?;
    }
    Ok(())
}
