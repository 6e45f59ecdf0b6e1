//! End-to-end case study: data → synthetic response → feature coefficients
//! → closest path points → cross-validation → CSV and JSON outputs.

mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub use self::config::{DataSource, ResponseMode, RunConfig, DEFAULT_K_MAX};
use crate::dataset::{
    apply_split, load_csv, summarize, synthesize, zscore, FunctionalDataset, SplitSpec,
};
use crate::error::{Error, Result};
use crate::features::CompressingFeature;
use crate::fmt::format_float;
use crate::io::write_atomic;
use crate::linearization::{feature_coefficients, response_from_feature};
use crate::model_selection::{cv_pls, cv_ridge, default_lambda_grid, select_index, CvCurve, Rule};
use crate::path_analysis::{
    default_lambda_range, nullspace_report, pls_closest, ridge_closest, NullspaceReport, Objective,
    PathSearchResult, RidgeDistance,
};
use crate::regression::{
    dot, norm, ridge_beta, CenteredData, CoefLabel, CoefficientVector, PlsModel,
};

pub const COEFFICIENTS_CSV: &str = "coefficients.csv";
pub const DISTANCE_CURVE_CSV: &str = "distance_curve.csv";
pub const PLS_DISTANCE_CURVE_CSV: &str = "pls_distance_curve.csv";
pub const CV_CURVE_CSV: &str = "cv_curve.csv";
pub const PLS_CV_CURVE_CSV: &str = "pls_cv_curve.csv";
pub const REPORT_JSON: &str = "report.json";

#[derive(Debug, Clone, Serialize)]
pub struct DatasetInfo {
    pub source: String,
    pub n_total: usize,
    pub n: usize,
    pub p: usize,
    pub zscored: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeatureInfo {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

/// One selected point on a path and how far it sits from `β_T1`.
#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    /// λ for ridge, component count for PLS.
    pub lambda_or_k: f64,
    pub coefficient_distance: f64,
    pub prediction_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cv_rmse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cv_se: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RidgeSummary {
    pub rank: usize,
    pub s1: f64,
    pub lambda_range: [f64; 2],
    /// Objective value at the closest point, as found by the search.
    pub distance_at_opt: f64,
    pub closest: Selection,
    pub cv_min: Selection,
    pub cv_1se: Selection,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlsSummary {
    pub k_max: usize,
    pub cv_k_max: usize,
    pub distance_at_opt: f64,
    pub closest: Selection,
    pub cv_min: Selection,
    pub cv_1se: Selection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFiles {
    pub coefficients: String,
    pub distance_curve: String,
    pub pls_distance_curve: String,
    pub cv_curve: String,
    pub pls_cv_curve: String,
}

/// Everything `report.json` holds. `generated_at_unix` is the only field
/// that varies between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct CaseStudyReport {
    pub generated_at_unix: u64,
    pub dataset: DatasetInfo,
    pub feature: FeatureInfo,
    pub objective: Objective,
    pub anchor_value: f64,
    pub z_mean: f64,
    pub y_mean: f64,
    pub slope: f64,
    pub training_r2: f64,
    pub cosine_beta_t1_column_mean: f64,
    pub ridge: RidgeSummary,
    pub pls: PlsSummary,
    pub nullspace: Vec<NullspaceReport>,
    pub checks: BTreeMap<String, bool>,
    pub files: OutputFiles,
}

impl CaseStudyReport {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.values().all(|ok| *ok)
    }
}

/// In-memory results of a run, before anything is written.
#[derive(Debug, Clone)]
pub struct CaseStudy {
    pub report: CaseStudyReport,
    pub grid: Vec<f64>,
    pub beta_t1: Vec<f64>,
    pub ridge_closest: PathSearchResult,
    pub pls_closest: PathSearchResult,
    pub ridge_cv: CvCurve,
    pub pls_cv: CvCurve,
    pub beta_ridge_cv_min: Vec<f64>,
    pub beta_ridge_cv_1se: Vec<f64>,
    pub beta_pls_cv_1se: Vec<f64>,
}

fn load_data(cfg: &RunConfig) -> Result<(FunctionalDataset, &'static str)> {
    match &cfg.data {
        DataSource::Csv { path, layout } => Ok((load_csv(cfg.resolve(path), *layout)?, "csv")),
        DataSource::Synthetic(params) => Ok((synthesize(params)?, "synthetic")),
    }
}

fn load_response_column(path: &Path, column: &str, n: usize) -> Result<Vec<f64>> {
    let mut reader = ::csv::ReaderBuilder::new()
        .trim(::csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?
        .clone();
    let idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Validation(format!("{} has no column `{column}`", path.display())))?;
    let mut y = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: r + 2,
            col: 0,
            msg: e.to_string(),
        })?;
        let cell = rec.get(idx).unwrap_or("");
        let v: f64 = cell.parse().map_err(|_| Error::Parse {
            row: r + 2,
            col: idx + 1,
            msg: format!("`{cell}` is not a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Validation(format!(
                "non-finite response at row {}, column {}",
                r + 2,
                idx + 1
            )));
        }
        y.push(v);
    }
    if y.len() != n {
        return Err(Error::Validation(format!(
            "response column has {} rows for {n} samples",
            y.len()
        )));
    }
    Ok(y)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (norm(a) * norm(b))
}

fn selection(
    data: &CenteredData,
    beta: &[f64],
    target: &[f64],
    lambda_or_k: f64,
    cv: Option<(&CvCurve, usize)>,
) -> Selection {
    let diff: Vec<f64> = beta.iter().zip(target).map(|(b, t)| b - t).collect();
    let pred = &data.xc * nalgebra::DVector::from_column_slice(&diff);
    Selection {
        lambda_or_k,
        coefficient_distance: dot(&diff, &diff),
        prediction_distance: pred.dot(&pred),
        cv_rmse: cv.map(|(c, i)| c.mean_error[i]),
        cv_se: cv.map(|(c, i)| c.se[i]),
    }
}

/// Runs the pipeline without touching the filesystem beyond reading inputs.
pub fn run(cfg: &RunConfig) -> Result<CaseStudy> {
    cfg.validate()?;
    let (full, source) = load_data(cfg).map_err(|e| e.in_stage("data"))?;

    let (train, train_rows) = match &cfg.split {
        Some(path) => {
            let spec = SplitSpec::load(cfg.resolve(path)).map_err(|e| e.in_stage("split"))?;
            let parts = apply_split(&full, &spec).map_err(|e| e.in_stage("split"))?;
            let rows: Vec<usize> = spec
                .train
                .iter()
                .copied()
                .filter(|i| !spec.outliers.contains(i))
                .collect();
            (parts.train, rows)
        }
        None => (full.clone(), (0..full.n()).collect()),
    };
    let train = if cfg.zscore {
        zscore(&train).map_err(|e| e.in_stage("data"))?
    } else {
        train
    };
    cfg.feature
        .validate(Some(train.p()))
        .map_err(|e| e.in_stage("feature"))?;

    let y = match &cfg.response {
        ResponseMode::FromFeature => response_from_feature(&train, &cfg.feature),
        ResponseMode::CsvColumn { path, column } => {
            load_response_column(&cfg.resolve(path), column, full.n())
                .map(|all| train_rows.iter().map(|&i| all[i]).collect())
        }
    }
    .map_err(|e| e.in_stage("response"))?;

    let fc =
        feature_coefficients(&train, &cfg.feature, &y).map_err(|e| e.in_stage("linearization"))?;
    let stats = summarize(&train, Some(&y)).map_err(|e| e.in_stage("linearization"))?;

    let data = CenteredData::from_raw(train.values(), &y).map_err(|e| e.in_stage("regression"))?;
    let model = data.ridge().map_err(|e| e.in_stage("regression"))?;
    let target = CoefficientVector::anchored(
        fc.beta_t1.clone(),
        &data.x_mean,
        data.y_mean,
        CoefLabel::FeatureT1,
    );

    let lambda_range = cfg
        .lambda_range
        .map(|[lo, hi]| (lo, hi))
        .unwrap_or_else(|| default_lambda_range(&model));
    let ridge_best = ridge_closest(
        &model,
        &target,
        cfg.objective,
        lambda_range,
        cfg.grid_points,
    )
    .map_err(|e| e.in_stage("path_analysis"))?;
    let k_max = cfg.k_max.min(model.rank());
    if k_max == 0 {
        return Err(Error::Degenerate("training data has rank 0".into()).in_stage("path_analysis"));
    }
    let pls_best = pls_closest(&data, &target, cfg.objective, k_max)
        .map_err(|e| e.in_stage("path_analysis"))?;

    let cv_grid = match &cfg.cv_lambda_grid {
        Some(g) => g.clone(),
        None => default_lambda_grid(model.s1()).map_err(|e| e.in_stage("model_selection"))?,
    };
    let ridge_cv = cv_ridge(&train, &y, &cv_grid, cfg.folds, cfg.seed)
        .map_err(|e| e.in_stage("model_selection"))?;
    // each fold trains on n - ceil(n/folds) rows, rank at most one less
    let n = train.n();
    let smallest_fold_train = n - n.div_ceil(cfg.folds);
    let cv_k_max = k_max.min(smallest_fold_train.saturating_sub(1)).max(1);
    let pls_cv = cv_pls(&train, &y, cv_k_max, cfg.folds, cfg.seed)
        .map_err(|e| e.in_stage("model_selection"))?;

    let sel = |curve: &CvCurve, rule| {
        select_index(curve, rule).map_err(|e| e.in_stage("model_selection"))
    };
    let r_min = sel(&ridge_cv, Rule::Min)?;
    let r_1se = sel(&ridge_cv, Rule::OneSe)?;
    let p_min = sel(&pls_cv, Rule::Min)?;
    let p_1se = sel(&pls_cv, Rule::OneSe)?;

    let beta_at = |l: f64| {
        ridge_beta(&model, l)
            .map(|c| c.beta)
            .map_err(|e| e.in_stage("model_selection"))
    };
    let beta_ridge_cv_min = beta_at(ridge_cv.grid[r_min])?;
    let beta_ridge_cv_1se = beta_at(ridge_cv.grid[r_1se])?;
    let pls_at =
        |k: usize| -> Result<PlsModel> { data.pls(k).map_err(|e| e.in_stage("model_selection")) };
    let k_min = pls_cv.grid[p_min] as usize;
    let k_1se = pls_cv.grid[p_1se] as usize;
    let beta_pls_cv_min = pls_at(k_min)?.beta;
    let beta_pls_cv_1se = pls_at(k_1se)?.beta;

    let t = &fc.beta_t1;
    let ridge = RidgeSummary {
        rank: model.rank(),
        s1: model.s1(),
        lambda_range: [lambda_range.0, lambda_range.1],
        distance_at_opt: ridge_best.distance_at_opt,
        closest: selection(
            &data,
            &ridge_best.beta_star.beta,
            t,
            ridge_best.lambda_star.unwrap_or(0.0),
            None,
        ),
        cv_min: selection(
            &data,
            &beta_ridge_cv_min,
            t,
            ridge_cv.grid[r_min],
            Some((&ridge_cv, r_min)),
        ),
        cv_1se: selection(
            &data,
            &beta_ridge_cv_1se,
            t,
            ridge_cv.grid[r_1se],
            Some((&ridge_cv, r_1se)),
        ),
    };
    let pls = PlsSummary {
        k_max,
        cv_k_max,
        distance_at_opt: pls_best.distance_at_opt,
        closest: selection(
            &data,
            &pls_best.beta_star.beta,
            t,
            pls_best.k_star.unwrap_or(0) as f64,
            None,
        ),
        cv_min: selection(
            &data,
            &beta_pls_cv_min,
            t,
            k_min as f64,
            Some((&pls_cv, p_min)),
        ),
        cv_1se: selection(
            &data,
            &beta_pls_cv_1se,
            t,
            k_1se as f64,
            Some((&pls_cv, p_1se)),
        ),
        warning: pls_best.warning.clone(),
    };

    let labelled = [
        (target.beta.clone(), CoefLabel::FeatureT1),
        (
            ridge_best.beta_star.beta.clone(),
            ridge_best.beta_star.label.clone(),
        ),
        (
            beta_ridge_cv_min.clone(),
            CoefLabel::Ridge {
                lambda: ridge_cv.grid[r_min],
            },
        ),
        (
            beta_ridge_cv_1se.clone(),
            CoefLabel::Ridge {
                lambda: ridge_cv.grid[r_1se],
            },
        ),
        (
            pls_best.beta_star.beta.clone(),
            pls_best.beta_star.label.clone(),
        ),
        (beta_pls_cv_1se.clone(), CoefLabel::Pls { k: k_1se }),
    ];
    let nullspace = labelled
        .into_iter()
        .map(|(beta, label)| {
            nullspace_report(
                &model,
                &CoefficientVector {
                    beta,
                    intercept: 0.0,
                    label,
                },
            )
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("path_analysis"))?;

    let cos_mean = cosine(&fc.beta_t1, &stats.column_mean);
    let mut checks = BTreeMap::new();
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    checks.insert(
        "z_mean_equals_anchor_value".into(),
        rel(fc.z_mean, fc.anchor_value),
    );
    checks.insert(
        "beta_t1_is_slope_times_gradient".into(),
        fc.beta_t1
            .iter()
            .zip(&fc.gradient.values)
            .all(|(b, g)| *b == fc.slope * g),
    );
    checks.insert(
        "ridge_closest_is_curve_minimum".into(),
        ridge_best
            .distance_curve
            .iter()
            .all(|(_, d)| ridge_best.distance_at_opt <= *d),
    );
    checks.insert(
        "pls_closest_is_curve_minimum".into(),
        pls_best
            .distance_curve
            .iter()
            .all(|(_, d)| pls_best.distance_at_opt <= *d),
    );
    let lambda_min = ridge_cv.grid[r_min];
    let lambda_1se = ridge_cv.grid[r_1se];
    checks.insert(
        "ridge_one_se_not_less_regularized".into(),
        lambda_1se >= lambda_min,
    );
    checks.insert("pls_one_se_not_less_regularized".into(), k_1se <= k_min);
    checks.insert(
        "ridge_coefficients_in_row_space".into(),
        nullspace[1..4]
            .iter()
            .all(|r| r.nullspace_norm <= 1e-8 * r.rowspace_norm.max(f64::MIN_POSITIVE)),
    );
    if cfg.feature.name() == "sum_of_squares" {
        checks.insert(
            "sum_of_squares_beta_parallel_to_column_mean".into(),
            (cos_mean.abs() - 1.0).abs() <= 1e-12,
        );
    }
    // distance reported for the closest point must match a fresh evaluation
    let recheck = RidgeDistance::new(&model, t, cfg.objective)
        .map(|d| d.eval(ridge_best.lambda_star.unwrap_or(0.0)))
        .map_err(|e| e.in_stage("path_analysis"))?;
    checks.insert(
        "ridge_distance_reproducible".into(),
        recheck == ridge_best.distance_at_opt,
    );

    let params = cfg.feature.params().into_iter().collect();
    let report = CaseStudyReport {
        generated_at_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        dataset: DatasetInfo {
            source: source.into(),
            n_total: full.n(),
            n: train.n(),
            p: train.p(),
            zscored: cfg.zscore,
        },
        feature: FeatureInfo {
            name: cfg.feature.name(),
            params,
        },
        objective: cfg.objective,
        anchor_value: fc.anchor_value,
        z_mean: fc.z_mean,
        y_mean: fc.y_mean,
        slope: fc.slope,
        training_r2: fc.r_squared(&y),
        cosine_beta_t1_column_mean: cos_mean,
        ridge,
        pls,
        nullspace,
        checks,
        files: OutputFiles {
            coefficients: COEFFICIENTS_CSV.into(),
            distance_curve: DISTANCE_CURVE_CSV.into(),
            pls_distance_curve: PLS_DISTANCE_CURVE_CSV.into(),
            cv_curve: CV_CURVE_CSV.into(),
            pls_cv_curve: PLS_CV_CURVE_CSV.into(),
        },
    };

    Ok(CaseStudy {
        report,
        grid: train.grid().to_vec(),
        beta_t1: fc.beta_t1,
        ridge_closest: ridge_best,
        pls_closest: pls_best,
        ridge_cv,
        pls_cv,
        beta_ridge_cv_min,
        beta_ridge_cv_1se,
        beta_pls_cv_1se,
    })
}

fn csv_table(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(format_float).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

impl CaseStudy {
    pub fn coefficients_csv(&self) -> String {
        let cols = [
            &self.grid,
            &self.beta_t1,
            &self.ridge_closest.beta_star.beta,
            &self.beta_ridge_cv_min,
            &self.beta_ridge_cv_1se,
            &self.pls_closest.beta_star.beta,
            &self.beta_pls_cv_1se,
        ];
        csv_table(
            &[
                "grid",
                "beta_t1",
                "beta_ridge_closest",
                "beta_ridge_cv_min",
                "beta_ridge_cv_1se",
                "beta_pls_closest",
                "beta_pls_cv_1se",
            ],
            (0..self.grid.len()).map(|j| cols.iter().map(|c| c[j]).collect()),
        )
    }

    fn distance_csv(result: &PathSearchResult) -> String {
        csv_table(
            &["lambda_or_k", "distance"],
            result.distance_curve.iter().map(|(x, d)| vec![*x, *d]),
        )
    }

    fn cv_csv(curve: &CvCurve) -> String {
        csv_table(
            &["lambda_or_k", "mean_rmse", "se"],
            (0..curve.grid.len()).map(|i| vec![curve.grid[i], curve.mean_error[i], curve.se[i]]),
        )
    }

    pub fn report_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes all outputs atomically into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            (COEFFICIENTS_CSV, self.coefficients_csv()),
            (DISTANCE_CURVE_CSV, Self::distance_csv(&self.ridge_closest)),
            (
                PLS_DISTANCE_CURVE_CSV,
                Self::distance_csv(&self.pls_closest),
            ),
            (CV_CURVE_CSV, Self::cv_csv(&self.ridge_cv)),
            (PLS_CV_CURVE_CSV, Self::cv_csv(&self.pls_cv)),
            (REPORT_JSON, self.report_json()),
        ];
        let mut written = Vec::with_capacity(files.len());
        for (name, body) in files {
            let path = dir.join(name);
            write_atomic(&path, body.as_bytes())?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Runs the case study and writes its outputs into `out_dir`.
pub fn cmd_casestudy(cfg: &RunConfig, out_dir: &Path) -> Result<CaseStudyReport> {
    let study = run(cfg)?;
    study.write(out_dir).map_err(|e| e.in_stage("output"))?;
    Ok(study.report)
}

/// Short human-readable digest of a report.
pub fn summary_text(report: &CaseStudyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} on {}x{} ({}): g(x̄)={:.6e} m={:.6e} R²={:.4}",
        report.feature.name,
        report.dataset.n,
        report.dataset.p,
        report.dataset.source,
        report.anchor_value,
        report.slope,
        report.training_r2
    );
    let r = &report.ridge;
    let _ = writeln!(
        s,
        "ridge: closest λ={:.4e} (d={:.4e}), cv_min λ={:.4e}, cv_1se λ={:.4e}",
        r.closest.lambda_or_k,
        r.closest.coefficient_distance,
        r.cv_min.lambda_or_k,
        r.cv_1se.lambda_or_k
    );
    let p = &report.pls;
    let _ = writeln!(
        s,
        "pls:   closest k={} (d={:.4e}), cv_min k={}, cv_1se k={}",
        p.closest.lambda_or_k,
        p.closest.coefficient_distance,
        p.cv_min.lambda_or_k,
        p.cv_1se.lambda_or_k
    );
    let failed: Vec<&String> = report
        .checks
        .iter()
        .filter(|(_, ok)| !**ok)
        .map(|(k, _)| k)
        .collect();
    if failed.is_empty() {
        let _ = writeln!(s, "checks: all {} passed", report.checks.len());
    } else {
        let _ = writeln!(s, "checks FAILED: {failed:?}");
    }
    s
}
