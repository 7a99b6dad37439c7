//! Python module `cds`: graphs, constrained extraction, segmentation and
//! metrics from `cds-core`.

use std::path::PathBuf;

use cds_core::eval;
use cds_core::extraction::{extract_constrained_clusters, DEFAULT_MARGIN};
use cds_core::graph::{self, DEFAULT_CLIQUE_CAP, DEFAULT_ORACLE_CAP};
use cds_core::segmentation::{
    decode_image, load_image, segment_prepared, Annotation, BoxRect, PreparedImage, Run,
    SegmentationMask, SigmaStrategy, DEFAULT_SUPERPIXELS,
};
use cds_core::{ConstraintSet, Dynamics, Error, ExtractionSettings, VertexSet};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(
    cds,
    SolverError,
    PyRuntimeError,
    "The dynamics could not satisfy the constraints."
);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::ConstraintMissed { .. } | Error::Degenerate { .. } | Error::OracleCap { .. } => {
            SolverError::new_err(e.to_string())
        }
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn vertex_set(members: Vec<usize>, n: usize) -> PyResult<VertexSet> {
    VertexSet::new(members, n).map_err(to_py)
}

/// Symmetric nonnegative similarity matrix with a zero diagonal.
#[pyclass(frozen, module = "cds")]
struct AffinityMatrix(graph::AffinityMatrix);

#[pymethods]
impl AffinityMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        graph::AffinityMatrix::from_rows(&rows)
            .map(Self)
            .map_err(to_py)
    }

    /// Graph on `n` vertices from `(i, j, w)` triples.
    #[staticmethod]
    fn from_edges(n: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        graph::AffinityMatrix::from_edges(n, &edges)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn unweighted(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        graph::AffinityMatrix::unweighted(n, &edges)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn __len__(&self) -> usize {
        self.0.n()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.0.n();
        if i >= n || j >= n {
            return Err(to_py(Error::IndexOutOfRange { index: i.max(j), n }));
        }
        Ok(self.0.get(i, j))
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        let n = self.0.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.0.get(i, j)).collect())
            .collect()
    }

    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "AffinityMatrix(n={}, edges={})",
            self.0.n(),
            self.0.edge_count()
        )
    }
}

/// The eight-vertex test graph with maximal cliques {0,1}, {1,2}, {3,4} and {4,5,6,7}.
#[pyfunction]
fn example_graph() -> AffinityMatrix {
    AffinityMatrix(graph::example_graph())
}

#[pyfunction]
#[pyo3(signature = (graph, members, strict = false))]
fn is_dominant_set(graph: &AffinityMatrix, members: Vec<usize>, strict: bool) -> PyResult<bool> {
    let s = vertex_set(members, graph.0.n())?;
    let d = if strict {
        graph::is_strictly_dominant_set(&graph.0, &s, DEFAULT_ORACLE_CAP)
    } else {
        graph::is_dominant_set(&graph.0, &s, DEFAULT_ORACLE_CAP)
    };
    d.map(|d| d.is_dominant()).map_err(to_py)
}

#[pyfunction]
fn maximal_cliques(graph: &AffinityMatrix) -> PyResult<Vec<Vec<usize>>> {
    let cliques = graph::enumerate_maximal_cliques(&graph.0, DEFAULT_CLIQUE_CAP).map_err(to_py)?;
    Ok(cliques.into_iter().map(|c| c.as_slice().to_vec()).collect())
}

#[pyclass(frozen, get_all, module = "cds")]
struct Cluster {
    support: Vec<usize>,
    vector: Vec<f64>,
    objective: f64,
    kkt_residual: f64,
    alpha: f64,
    iterations: usize,
    converged: bool,
}

#[pymethods]
impl Cluster {
    fn __repr__(&self) -> String {
        format!(
            "Cluster(support={:?}, alpha={:.4}, converged={})",
            self.support, self.alpha, self.converged
        )
    }
}

#[pyclass(frozen, get_all, module = "cds")]
struct Extraction {
    clusters: Vec<Py<Cluster>>,
    union: Vec<usize>,
    leftover: Vec<usize>,
}

#[pymethods]
impl Extraction {
    fn __repr__(&self) -> String {
        format!(
            "Extraction(clusters={}, union={:?})",
            self.clusters.len(),
            self.union
        )
    }
}

fn extraction_settings(dynamics: &str, margin: f64) -> PyResult<ExtractionSettings> {
    Ok(ExtractionSettings {
        dynamics: dynamics.parse::<Dynamics>().map_err(to_py)?,
        margin,
        ..Default::default()
    })
}

/// Peels off constrained dominant sets until every seed is covered.
#[pyfunction]
#[pyo3(signature = (graph, seeds, dynamics = "replicator", margin = DEFAULT_MARGIN))]
fn extract(
    py: Python<'_>,
    graph: &AffinityMatrix,
    seeds: Vec<usize>,
    dynamics: &str,
    margin: f64,
) -> PyResult<Extraction> {
    let settings = extraction_settings(dynamics, margin)?;
    let constraints =
        ConstraintSet::new(vertex_set(seeds, graph.0.n())?, graph.0.n()).map_err(to_py)?;
    let result = extract_constrained_clusters(&graph.0, &constraints, &settings).map_err(to_py)?;
    let clusters = result
        .clusters
        .iter()
        .map(|c| {
            Py::new(
                py,
                Cluster {
                    support: c.support.as_slice().to_vec(),
                    vector: c.vector.as_slice().to_vec(),
                    objective: c.objective,
                    kkt_residual: c.kkt_residual,
                    alpha: c.alpha,
                    iterations: c.iterations,
                    converged: c.converged,
                },
            )
        })
        .collect::<PyResult<_>>()?;
    Ok(Extraction {
        clusters,
        union: result.union_of_supports.as_slice().to_vec(),
        leftover: result.leftover_constraints.as_slice().to_vec(),
    })
}

/// Binary mask in row-major order.
#[pyclass(frozen, eq, module = "cds")]
#[derive(PartialEq)]
struct Mask(SegmentationMask);

#[pymethods]
impl Mask {
    #[new]
    fn new(rows: Vec<Vec<bool>>) -> PyResult<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(PyValueError::new_err("mask rows are ragged"));
        }
        let bits = rows.into_iter().flatten().collect();
        SegmentationMask::from_bits(width as u32, height as u32, bits)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        SegmentationMask::load(path).map(Self).map_err(to_py)
    }

    /// Decodes `[start, length]` runs of foreground pixels.
    #[staticmethod]
    fn from_rle(width: u32, height: u32, runs: Vec<(usize, usize)>) -> PyResult<Self> {
        let runs: Vec<Run> = runs.into_iter().map(|(s, l)| Run(s, l)).collect();
        SegmentationMask::from_rle(width, height, &runs)
            .map(Self)
            .map_err(to_py)
    }

    fn to_rle(&self) -> Vec<(usize, usize)> {
        self.0.to_rle().into_iter().map(|r| (r.0, r.1)).collect()
    }

    fn to_list(&self) -> Vec<Vec<bool>> {
        let bits: Vec<bool> = self.0.bits().collect();
        bits.chunks(self.0.width().max(1) as usize)
            .map(<[bool]>::to_vec)
            .collect()
    }

    fn save_png(&self, path: PathBuf) -> PyResult<()> {
        self.0.save_png(path).map_err(to_py)
    }

    fn to_png(&self) -> PyResult<Vec<u8>> {
        self.0.to_png_bytes().map_err(to_py)
    }

    #[getter]
    fn width(&self) -> u32 {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> u32 {
        self.0.height()
    }

    fn count(&self) -> usize {
        self.0.count()
    }

    fn get(&self, x: u32, y: u32) -> PyResult<bool> {
        if x >= self.0.width() || y >= self.0.height() {
            return Err(PyValueError::new_err(format!(
                "pixel ({x}, {y}) is outside the mask"
            )));
        }
        Ok(self.0.get(x, y))
    }

    fn __repr__(&self) -> String {
        format!(
            "Mask({}x{}, foreground={})",
            self.0.width(),
            self.0.height(),
            self.0.count()
        )
    }
}

#[pyclass(frozen, get_all, module = "cds")]
struct Segmentation {
    mask: Py<Mask>,
    /// Superpixels in the union of kept clusters.
    extracted: Vec<usize>,
    /// Diagnostics as pretty JSON, the same document the CLI writes.
    diagnostics: String,
}

#[pymethods]
impl Segmentation {
    fn save_mask(&self, path: PathBuf) -> PyResult<()> {
        self.mask.get().0.save_png(path).map_err(to_py)
    }
}

fn read_image(image: &Bound<'_, PyAny>) -> PyResult<cds_core::segmentation::RgbImage> {
    if let Ok(bytes) = image.extract::<Vec<u8>>() {
        return decode_image(&bytes).map_err(to_py);
    }
    let path: PathBuf = image.extract()?;
    load_image(path).map_err(to_py)
}

fn sigma_strategy(sigma: Option<f64>, knn: Option<usize>) -> PyResult<SigmaStrategy> {
    match (sigma, knn) {
        (Some(_), Some(_)) => Err(PyValueError::new_err("pass either sigma or knn, not both")),
        (Some(sigma), None) => Ok(SigmaStrategy::Single { sigma }),
        (None, Some(knn_k)) => Ok(SigmaStrategy::SelfTuning { knn_k }),
        (None, None) => Ok(SigmaStrategy::default()),
    }
}

/// Segments an image (path or encoded bytes) from an annotation in the
/// annotator JSON format. A fixed `sigma` replaces the default self-tuning
/// affinity; `knn` changes its neighbour count.
#[pyfunction]
#[pyo3(signature = (
    image, annotation, superpixels = DEFAULT_SUPERPIXELS, sigma = None, knn = None,
    dynamics = "replicator", margin = DEFAULT_MARGIN,
))]
#[allow(clippy::too_many_arguments)]
fn segment(
    py: Python<'_>,
    image: &Bound<'_, PyAny>,
    annotation: &str,
    superpixels: usize,
    sigma: Option<f64>,
    knn: Option<usize>,
    dynamics: &str,
    margin: f64,
) -> PyResult<Segmentation> {
    let img = read_image(image)?;
    let ann = Annotation::from_json(annotation).map_err(to_py)?;
    let strategy = sigma_strategy(sigma, knn)?;
    let extraction = extraction_settings(dynamics, margin)?;
    let seg = py
        .detach(|| {
            let prepared = PreparedImage::new(img, superpixels)?;
            let affinity = prepared.affinity(&strategy)?;
            segment_prepared(&prepared, &affinity, &strategy, &ann, &extraction)
        })
        .map_err(to_py)?;
    let diagnostics = serde_json::to_string_pretty(&seg.diagnostics)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(Segmentation {
        mask: Py::new(py, Mask(seg.mask))?,
        extracted: seg.extracted.as_slice().to_vec(),
        diagnostics,
    })
}

#[pyfunction]
fn jaccard(mask: &Mask, truth: &Mask) -> PyResult<f64> {
    eval::jaccard(&mask.0, &truth.0).map_err(to_py)
}

#[pyfunction]
fn dsc(mask: &Mask, truth: &Mask) -> PyResult<f64> {
    eval::dsc(&mask.0, &truth.0).map_err(to_py)
}

/// Fraction of misclassified pixels inside `box = (x, y, w, h)`.
#[pyfunction]
#[pyo3(name = "error_rate")]
fn error_rate_py(mask: &Mask, truth: &Mask, r#box: (i64, i64, i64, i64)) -> PyResult<f64> {
    let (x, y, w, h) = r#box;
    eval::error_rate(&mask.0, &truth.0, BoxRect::new(x, y, w, h)).map_err(to_py)
}

#[pymodule]
pub fn cds(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add_class::<AffinityMatrix>()?;
    m.add_class::<Cluster>()?;
    m.add_class::<Extraction>()?;
    m.add_class::<Mask>()?;
    m.add_class::<Segmentation>()?;
    m.add_function(wrap_pyfunction!(example_graph, m)?)?;
    m.add_function(wrap_pyfunction!(is_dominant_set, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_cliques, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(segment, m)?)?;
    m.add_function(wrap_pyfunction!(jaccard, m)?)?;
    m.add_function(wrap_pyfunction!(dsc, m)?)?;
    m.add_function(wrap_pyfunction!(error_rate_py, m)?)?;
    Ok(())
}
