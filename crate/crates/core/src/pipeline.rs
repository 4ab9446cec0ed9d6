//! Experiment harness shared by the command-line tool and the end-to-end
//! tests: featurize an image dataset in pixel space and in transform space,
//! cross-validate a PCA + linear SVM classifier in each, and build the
//! variance and discriminant summaries used for reporting.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::analysis::{
    cross_validate, pca_fit, plda_fit, svm_train, CvResult, LabeledDataset, DEFAULT_SVM_C,
    DEFAULT_SVM_EPOCHS,
};
use crate::datasets::ImageDataset;
use crate::error::{Error, Result};
use crate::rcdt::{rcdt_forward, RcdtConfig, Template};

pub const DEFAULT_FOLDS: usize = 10;
const PLDA_LAMBDA: f64 = 1.0;

/// Flattened pixel intensities, one row per image.
pub fn image_features(dataset: &ImageDataset) -> Result<LabeledDataset> {
    let first = dataset.images.first().ok_or_else(|| Error::Domain("empty dataset".into()))?;
    let d = first.width() * first.height();
    if dataset.images.iter().any(|im| im.width() * im.height() != d) {
        return Err(Error::Domain("images must share dimensions".into()));
    }
    let features = DMatrix::from_fn(dataset.images.len(), d, |i, j| dataset.images[i].pixels()[j]);
    LabeledDataset::new(features, dataset.labels.clone(), "image-space")
}

/// Flattened transform grids against the given template, one row per image.
pub fn rcdt_features(
    dataset: &ImageDataset,
    template: &Template,
    config: &RcdtConfig,
) -> Result<LabeledDataset> {
    if dataset.images.is_empty() {
        return Err(Error::Domain("empty dataset".into()));
    }
    let reps: Vec<Vec<f64>> = dataset
        .images
        .par_iter()
        .map(|im| rcdt_forward(im, template, config).map(|r| r.values().to_vec()))
        .collect::<Result<_>>()?;
    let d = reps[0].len();
    let features = DMatrix::from_fn(reps.len(), d, |i, j| reps[i][j]);
    LabeledDataset::new(features, dataset.labels.clone(), "rcdt-space")
}

/// Everything reported for one feature space.
#[derive(Debug, Clone)]
pub struct SpaceReport {
    pub space: String,
    pub cv: CvResult,
    /// Accuracy of a model fit and evaluated on the full dataset.
    pub train_accuracy: f64,
    /// Cumulative fraction of variance over the retained components.
    pub cpv: Vec<f64>,
    /// Two reporting coordinates per sample: the leading penalized
    /// discriminant and the top variance direction orthogonal to it.
    pub projections: Vec<(f64, f64)>,
}

/// Cross-validates and summarizes one feature space.
pub fn evaluate_space(dataset: &LabeledDataset, folds: usize, seed: u64) -> Result<SpaceReport> {
    let cv = cross_validate(&dataset.features, &dataset.labels, folds, seed)?;

    let pca = pca_fit(&dataset.features)?;
    let whitened = pca.project_whitened(&dataset.features);
    let model = svm_train(&whitened, &dataset.labels, DEFAULT_SVM_C, DEFAULT_SVM_EPOCHS, seed)?;
    let train_accuracy = model.accuracy(&whitened, &dataset.labels)?;
    let cpv = crate::analysis::cpv_curve(&pca.eigenvalues)?;
    let reduced = pca.project(&dataset.features);

    let dirs = plda_fit(&reduced, &dataset.labels, PLDA_LAMBDA)?;
    let w1: DVector<f64> = dirs.column(0).into_owned();
    let w2 = second_axis(&pca.eigenvalues, pca.rank(), &w1);
    let projections = (0..reduced.nrows())
        .map(|i| {
            let row = reduced.row(i).transpose();
            (row.dot(&w1), row.dot(&w2))
        })
        .collect();

    Ok(SpaceReport { space: dataset.space.clone(), cv, train_accuracy, cpv, projections })
}

// With two classes there is a single discriminant, so the second reporting
// axis is the leading principal direction orthogonalized against it.
fn second_axis(eigenvalues: &[f64], rank: usize, w1: &DVector<f64>) -> DVector<f64> {
    debug_assert_eq!(eigenvalues.len(), rank);
    for lead in 0..rank {
        let mut e: DVector<f64> = DVector::zeros(rank);
        e[lead] = 1.0;
        let mut v = &e - w1 * w1.dot(&e);
        let norm = v.norm();
        if norm > 1e-8 {
            v /= norm;
            return v;
        }
    }
    DVector::zeros(rank)
}

/// Side-by-side comparison of pixel-space and transform-space pipelines on
/// the same dataset.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub image: SpaceReport,
    pub rcdt: SpaceReport,
}

pub fn compare_spaces(
    dataset: &ImageDataset,
    template: &Template,
    config: &RcdtConfig,
    folds: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let image = evaluate_space(&image_features(dataset)?, folds, seed)?;
    let rcdt = evaluate_space(&rcdt_features(dataset, template, config)?, folds, seed)?;
    Ok(ExperimentReport { image, rcdt })
}
