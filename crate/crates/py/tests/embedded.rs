use cds::cds;
use pyo3::ffi::c_str;
use pyo3::prelude::*;

fn with_module<F: FnOnce(Python<'_>)>(f: F) {
    static INIT: std::sync::Once = std::sync::Once::new();
    INIT.call_once(|| {
        pyo3::append_to_inittab!(cds);
        Python::initialize();
    });
    Python::attach(f);
}

#[test]
fn extraction_from_python() {
    with_module(|py| {
        py.run(
            c_str!(
                r#"
import cds
g = cds.example_graph()
r = cds.extract(g, [4])
assert r.union == [3, 4, 5, 6, 7], r.union
assert all(c.converged for c in r.clusters)
assert sorted(cds.maximal_cliques(g)) == [[0, 1], [1, 2], [3, 4], [4, 5, 6, 7]]
assert cds.is_dominant_set(g, [0, 1]) and not cds.is_dominant_set(g, [0, 2])
"#
            ),
            None,
            None,
        )
        .unwrap();
    });
}

#[test]
fn errors_map_to_python_exceptions() {
    with_module(|py| {
        py.run(
            c_str!(
                r#"
import cds
for bad in ([[0.0, 1.0], [0.5, 0.0]], [[1.0]]):
    try:
        cds.AffinityMatrix(bad)
    except ValueError:
        pass
    else:
        raise AssertionError(bad)
try:
    cds.extract(cds.example_graph(), [0], dynamics="newton")
except ValueError:
    pass
else:
    raise AssertionError("unknown dynamics accepted")
assert issubclass(cds.SolverError, RuntimeError)
"#
            ),
            None,
            None,
        )
        .unwrap();
    });
}

#[test]
fn masks_and_metrics() {
    with_module(|py| {
        py.run(
            c_str!(
                r#"
import cds
a = cds.Mask([[True, True, False], [False, False, False]])
b = cds.Mask([[True, False, False], [False, False, True]])
assert a.to_rle() == [(0, 2)]
assert cds.Mask.from_rle(3, 2, a.to_rle()) == a
assert abs(cds.jaccard(a, b) - 1 / 3) < 1e-15
assert abs(cds.dsc(a, b) - 0.5) < 1e-15
assert abs(cds.error_rate(a, b, (0, 0, 3, 2)) - 2 / 6) < 1e-15
"#
            ),
            None,
            None,
        )
        .unwrap();
    });
}
