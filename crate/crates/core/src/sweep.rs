//! Parameter-plane epidemic diagrams: grid classification (theory and
//! empirical), theory boundary curves, and CSV/SVG exporters.
//!
//! Cells are pure functions of their `(beta1, beta2)` coordinates, so the
//! result is identical regardless of evaluation order or worker count; the
//! exports are byte-reproducible.

use std::io::Write;
use std::path::Path;

use crate::analysis::{
    beta2_bistable_threshold, classify_theory, disease_free_boundary_beta2, Domain,
    DomainClassification,
};
use crate::error::Result;
use crate::model::SisTemplate;
use crate::scalar::{cstu, default_tol, Scalar};
use crate::sim::{classify_empirical_default, EmpiricalDomain, IntegratorConfig};

/// Rectangular grid in the `(beta1, beta2)` plane.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec<T> {
    pub beta1_range: (T, T),
    pub beta2_range: (T, T),
    /// Number of samples along each axis. A single-sample axis evaluates at
    /// the lower end of its range.
    pub resolution: (usize, usize),
}

impl<T: Scalar> GridSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let ((b1lo, b1hi), (b2lo, b2hi)) = (self.beta1_range, self.beta2_range);
        let (n1, n2) = self.resolution;
        if n1 == 0 || n2 == 0 {
            return Err(crate::error::SisError::InvalidStructure(
                "grid resolution must be at least 1 per axis".into(),
            ));
        }
        let ordered = |lo: T, hi: T| lo < hi;
        if (n1 > 1 && !ordered(b1lo, b1hi)) || (n2 > 1 && !ordered(b2lo, b2hi)) {
            return Err(crate::error::SisError::InvalidStructure(
                "grid ranges need lo < hi".into(),
            ));
        }
        if b1lo < T::zero() || b2lo < T::zero() {
            return Err(crate::error::SisError::InvalidStructure(
                "infection rates cannot be negative".into(),
            ));
        }
        Ok(())
    }

    pub fn beta1_value(&self, i: usize) -> T {
        grid_value(self.beta1_range, self.resolution.0, i)
    }

    pub fn beta2_value(&self, j: usize) -> T {
        grid_value(self.beta2_range, self.resolution.1, j)
    }
}

fn grid_value<T: Scalar>((lo, hi): (T, T), count: usize, index: usize) -> T {
    if count <= 1 {
        lo
    } else {
        lo + (hi - lo) * cstu::<T>(index) / cstu::<T>(count - 1)
    }
}

/// Which classifications each cell carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Theory,
    Empirical,
    Both,
}

impl SweepMode {
    pub fn wants_theory(&self) -> bool {
        matches!(self, SweepMode::Theory | SweepMode::Both)
    }
    pub fn wants_empirical(&self) -> bool {
        matches!(self, SweepMode::Empirical | SweepMode::Both)
    }
}

/// One grid cell with its classifications; `note` carries per-cell error
/// diagnostics (such cells count as undecided, the sweep never aborts).
#[derive(Debug, Clone)]
pub struct DiagramCell<T> {
    pub beta1: T,
    pub beta2: T,
    pub theory: Option<DomainClassification<T>>,
    pub empirical: Option<EmpiricalDomain>,
    pub note: Option<String>,
}

/// The three theory boundary curves of the epidemic diagram: the vertical
/// endemic threshold (green), the bistable threshold curve (blue) and the
/// disease-free boundary (red).
#[derive(Debug, Clone)]
pub struct Boundaries<T> {
    pub green_beta1: Option<T>,
    pub blue: Vec<(T, T)>,
    pub red: Vec<(T, T)>,
}

impl<T> Default for Boundaries<T> {
    fn default() -> Self {
        Self {
            green_beta1: None,
            blue: Vec::new(),
            red: Vec::new(),
        }
    }
}

/// Epidemic diagram over a parameter grid.
#[derive(Debug, Clone)]
pub struct Diagram<T> {
    pub grid: GridSpec<T>,
    /// Row-major cells: `beta1` index outer, `beta2` index inner.
    pub cells: Vec<DiagramCell<T>>,
    pub boundaries: Boundaries<T>,
}

/// Classify every grid cell in the requested mode(s) and compute the theory
/// boundary curves. `workers` threads fan out over the cells; results merge
/// by grid index, so the outcome does not depend on the worker count.
pub fn sweep<T: Scalar>(
    tpl: &SisTemplate<T>,
    grid: &GridSpec<T>,
    cfg: &IntegratorConfig<T>,
    mode: SweepMode,
    workers: usize,
) -> Result<Diagram<T>> {
    grid.validate()?;
    cfg.validate()?;
    let (n1, n2) = grid.resolution;
    let total = n1 * n2;

    let eval_cell = |idx: usize| -> DiagramCell<T> {
        let beta1 = grid.beta1_value(idx / n2);
        let beta2 = grid.beta2_value(idx % n2);
        let mut cell = DiagramCell {
            beta1,
            beta2,
            theory: None,
            empirical: None,
            note: None,
        };
        let model = match tpl.instantiate(beta1, beta2) {
            Ok(m) => m,
            Err(e) => {
                cell.note = Some(e.to_string());
                if mode.wants_empirical() {
                    cell.empirical = Some(EmpiricalDomain::Undecided);
                }
                return cell;
            }
        };
        if mode.wants_theory() {
            match classify_theory(&model) {
                Ok(c) => cell.theory = Some(c),
                Err(e) => cell.note = Some(e.to_string()),
            }
        }
        if mode.wants_empirical() {
            match classify_empirical_default(&model, cfg) {
                Ok(c) => cell.empirical = Some(c.domain),
                Err(e) => {
                    cell.empirical = Some(EmpiricalDomain::Undecided);
                    let msg = e.to_string();
                    cell.note = Some(match cell.note.take() {
                        Some(prev) => format!("{prev}; {msg}"),
                        None => msg,
                    });
                }
            }
        }
        cell
    };

    let cells: Vec<DiagramCell<T>> = if workers <= 1 || total <= 1 {
        (0..total).map(eval_cell).collect()
    } else {
        let workers = workers.min(total);
        let mut slots: Vec<Option<DiagramCell<T>>> = vec![None; total];
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let eval = &eval_cell;
                    scope.spawn(move || {
                        (w..total)
                            .step_by(workers)
                            .map(|idx| (idx, eval(idx)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (idx, cell) in h.join().expect("sweep worker panicked") {
                    slots[idx] = Some(cell);
                }
            }
        });
        slots
            .into_iter()
            .map(|c| c.expect("cell computed"))
            .collect()
    };

    Ok(Diagram {
        grid: *grid,
        cells,
        boundaries: boundaries(tpl, grid)?,
    })
}

fn boundaries<T: Scalar>(tpl: &SisTemplate<T>, grid: &GridSpec<T>) -> Result<Boundaries<T>> {
    let mut out = Boundaries::default();
    let rho = tpl.gamma_inv_a().spectral_radius(default_tol::<T>())?;
    if rho > T::zero() {
        out.green_beta1 = Some(T::one() / rho);
    }
    for i in 0..grid.resolution.0 {
        let beta1 = grid.beta1_value(i);
        if let Ok(Some(hat)) = beta2_bistable_threshold(tpl, beta1) {
            out.blue.push((beta1, hat));
        }
        if let Ok(b2) = disease_free_boundary_beta2(tpl, beta1) {
            out.red.push((beta1, b2));
        }
    }
    Ok(out)
}

fn fmt<T: Scalar>(v: T) -> String {
    format!("{}", v.to_f64().unwrap_or(f64::NAN))
}

impl<T: Scalar> Diagram<T> {
    /// CSV export: one row per cell
    /// (`beta1,beta2,theory,empirical,rho_df,bistable_margin`), then one
    /// section per boundary curve. Sections for undefined boundaries are
    /// present but empty.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "beta1,beta2,theory,empirical,rho_df,bistable_margin")?;
        for cell in &self.cells {
            let theory = cell.theory.as_ref().map_or("-", |c| c.domain.as_str());
            let empirical = cell.empirical.map_or("-", |d| d.as_str());
            let rho_df = cell
                .theory
                .as_ref()
                .map_or(String::new(), |c| fmt(c.disease_free_lhs));
            let margin = cell
                .theory
                .as_ref()
                .and_then(|c| c.bistable_margin)
                .map_or(String::new(), fmt);
            writeln!(
                w,
                "{},{},{theory},{empirical},{rho_df},{margin}",
                fmt(cell.beta1),
                fmt(cell.beta2)
            )?;
        }
        writeln!(w, "# boundary: green")?;
        if let Some(g) = self.boundaries.green_beta1 {
            writeln!(w, "{}", fmt(g))?;
        }
        writeln!(w, "# boundary: blue")?;
        for (b1, b2) in &self.boundaries.blue {
            writeln!(w, "{},{}", fmt(*b1), fmt(*b2))?;
        }
        writeln!(w, "# boundary: red")?;
        for (b1, b2) in &self.boundaries.red {
            writeln!(w, "{},{}", fmt(*b1), fmt(*b2))?;
        }
        Ok(())
    }

    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut f)?;
        Ok(())
    }

    /// SVG heatmap: light-gray, gray and
    /// black cells for the disease-free, bistable and endemic domains, white
    /// for undecided or indeterminate, with the green/blue/red theory curves
    /// overlaid. Cells are shaded by the empirical verdict when present,
    /// otherwise by the theory verdict.
    pub fn write_svg(&self, w: &mut impl Write) -> std::io::Result<()> {
        const CELL: f64 = 12.0;
        const MARGIN: f64 = 42.0;
        let (n1, n2) = self.grid.resolution;
        let plot_w = CELL * n1 as f64;
        let plot_h = CELL * n2 as f64;
        let width = plot_w + 2.0 * MARGIN;
        let height = plot_h + 2.0 * MARGIN;

        writeln!(
            w,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width:.1} {height:.1}\">"
        )?;
        writeln!(
            w,
            "<rect x=\"0\" y=\"0\" width=\"{width:.1}\" height=\"{height:.1}\" fill=\"white\"/>"
        )?;
        for (idx, cell) in self.cells.iter().enumerate() {
            let i1 = idx / n2;
            let i2 = idx % n2;
            let x = MARGIN + CELL * i1 as f64;
            let y = MARGIN + CELL * (n2 - 1 - i2) as f64;
            let color = cell_color(cell);
            writeln!(
                w,
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{CELL:.1}\" height=\"{CELL:.1}\" fill=\"{color}\"/>"
            )?;
        }

        // Value-to-pixel maps aligned with the cell centers.
        let b1_step = if n1 > 1 {
            (to_f(self.grid.beta1_range.1) - to_f(self.grid.beta1_range.0)) / (n1 - 1) as f64
        } else {
            0.0
        };
        let b2_step = if n2 > 1 {
            (to_f(self.grid.beta2_range.1) - to_f(self.grid.beta2_range.0)) / (n2 - 1) as f64
        } else {
            0.0
        };
        let px = |b1: f64| {
            if b1_step == 0.0 {
                MARGIN + 0.5 * CELL
            } else {
                MARGIN + ((b1 - to_f(self.grid.beta1_range.0)) / b1_step + 0.5) * CELL
            }
        };
        let py = |b2: f64| {
            if b2_step == 0.0 {
                MARGIN + plot_h - 0.5 * CELL
            } else {
                MARGIN + plot_h - ((b2 - to_f(self.grid.beta2_range.0)) / b2_step + 0.5) * CELL
            }
        };

        if let Some(g) = self.boundaries.green_beta1 {
            let gx = px(to_f(g));
            if gx >= MARGIN && gx <= MARGIN + plot_w {
                writeln!(
                    w,
                    "<line x1=\"{gx:.2}\" y1=\"{MARGIN:.1}\" x2=\"{gx:.2}\" y2=\"{:.1}\" stroke=\"green\" stroke-width=\"2\"/>",
                    MARGIN + plot_h
                )?;
            }
        }
        for (curve, color) in [
            (&self.boundaries.blue, "blue"),
            (&self.boundaries.red, "red"),
        ] {
            if curve.is_empty() {
                continue;
            }
            let points: Vec<String> = curve
                .iter()
                .map(|(b1, b2)| format!("{:.2},{:.2}", px(to_f(*b1)), py(to_f(*b2))))
                .collect();
            writeln!(
                w,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
                points.join(" ")
            )?;
        }

        // Axis labels.
        writeln!(
            w,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">beta1</text>",
            MARGIN + plot_w / 2.0,
            height - 8.0
        )?;
        writeln!(
            w,
            "<text x=\"12\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 12 {:.1})\">beta2</text>",
            MARGIN + plot_h / 2.0,
            MARGIN + plot_h / 2.0
        )?;
        writeln!(w, "</svg>")?;
        Ok(())
    }

    pub fn export_svg(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_svg(&mut f)?;
        Ok(())
    }
}

fn to_f<T: Scalar>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

fn cell_color<T: Scalar>(cell: &DiagramCell<T>) -> &'static str {
    const LIGHT_GRAY: &str = "#d3d3d3";
    const GRAY: &str = "#808080";
    const BLACK: &str = "#000000";
    const WHITE: &str = "#ffffff";
    if let Some(e) = cell.empirical {
        return match e {
            EmpiricalDomain::DiseaseFree => LIGHT_GRAY,
            EmpiricalDomain::Bistable => GRAY,
            EmpiricalDomain::Endemic => BLACK,
            EmpiricalDomain::Undecided => WHITE,
        };
    }
    match cell.theory.as_ref().map(|c| c.domain) {
        Some(Domain::DiseaseFree) => LIGHT_GRAY,
        Some(Domain::Bistable) => GRAY,
        Some(Domain::Endemic) => BLACK,
        _ => WHITE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn worked_template() -> SisTemplate<f64> {
        SisTemplate::new(
            vec![1.0, 1.0],
            DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
            vec![
                DenseMatrix::from_fn(2, |_, _| 1.0),
                DenseMatrix::from_fn(2, |_, _| 1.0),
            ],
        )
        .unwrap()
    }

    fn classical_template() -> SisTemplate<f64> {
        SisTemplate::classical(
            vec![1.0, 1.0],
            DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
        )
        .unwrap()
    }

    fn point_grid(beta1: f64, beta2: f64) -> GridSpec<f64> {
        GridSpec {
            beta1_range: (beta1, beta1),
            beta2_range: (beta2, beta2),
            resolution: (1, 1),
        }
    }

    #[test]
    fn single_cell_disease_free() {
        let d = sweep(
            &worked_template(),
            &point_grid(0.1, 0.05),
            &IntegratorConfig::default(),
            SweepMode::Theory,
            1,
        )
        .unwrap();
        assert_eq!(d.cells.len(), 1);
        assert_eq!(
            d.cells[0].theory.as_ref().unwrap().domain,
            Domain::DiseaseFree
        );
    }

    #[test]
    fn classical_template_has_no_bistable_cells() {
        let grid = GridSpec {
            beta1_range: (0.0, 1.8),
            beta2_range: (0.0, 3.0),
            resolution: (7, 7),
        };
        let d = sweep(
            &classical_template(),
            &grid,
            &IntegratorConfig::default(),
            SweepMode::Theory,
            1,
        )
        .unwrap();
        assert!(d
            .cells
            .iter()
            .filter_map(|c| c.theory.as_ref())
            .all(|c| c.domain != Domain::Bistable));
        // The blue and red boundary curves do not exist without higher-order
        // terms, but their CSV sections are still emitted.
        assert!(d.boundaries.blue.is_empty());
        assert!(d.boundaries.red.is_empty());
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("# boundary: blue\n# boundary: red\n"));
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let grid = GridSpec {
            beta1_range: (0.1, 0.5),
            beta2_range: (0.1, 1.0),
            resolution: (2, 2),
        };
        let d = sweep(
            &worked_template(),
            &grid,
            &IntegratorConfig::default(),
            SweepMode::Theory,
            1,
        )
        .unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data_rows: Vec<&str> = text
            .lines()
            .skip(1)
            .take_while(|l| !l.starts_with('#'))
            .collect();
        assert_eq!(data_rows.len(), 4);
        assert!(text.starts_with("beta1,beta2,theory,empirical,rho_df,bistable_margin\n"));
    }

    #[test]
    fn sweep_deterministic_across_worker_counts() {
        let grid = GridSpec {
            beta1_range: (0.0, 1.6),
            beta2_range: (0.0, 1.5),
            resolution: (6, 5),
        };
        let cfg = IntegratorConfig::default();
        let tpl = worked_template();
        let d1 = sweep(&tpl, &grid, &cfg, SweepMode::Theory, 1).unwrap();
        let d8 = sweep(&tpl, &grid, &cfg, SweepMode::Theory, 8).unwrap();
        let mut b1 = Vec::new();
        let mut b8 = Vec::new();
        d1.write_csv(&mut b1).unwrap();
        d8.write_csv(&mut b8).unwrap();
        assert_eq!(b1, b8);
    }

    #[test]
    fn reexport_is_byte_identical() {
        let d = sweep(
            &worked_template(),
            &point_grid(0.5, 1.0),
            &IntegratorConfig::default(),
            SweepMode::Theory,
            1,
        )
        .unwrap();
        let mut b1 = Vec::new();
        let mut b2 = Vec::new();
        d.write_csv(&mut b1).unwrap();
        d.write_csv(&mut b2).unwrap();
        assert_eq!(b1, b2);
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        d.write_svg(&mut s1).unwrap();
        d.write_svg(&mut s2).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn svg_single_disease_free_cell_is_light_gray() {
        let d = sweep(
            &worked_template(),
            &point_grid(0.1, 0.05),
            &IntegratorConfig::default(),
            SweepMode::Theory,
            1,
        )
        .unwrap();
        let mut buf = Vec::new();
        d.write_svg(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("fill=\"#d3d3d3\""));
        assert!(!text.contains("fill=\"#808080\""));
    }

    #[test]
    fn svg_without_bistable_cells_has_no_gray() {
        let grid = GridSpec {
            beta1_range: (0.0, 1.8),
            beta2_range: (0.0, 3.0),
            resolution: (5, 5),
        };
        let d = sweep(
            &classical_template(),
            &grid,
            &IntegratorConfig::default(),
            SweepMode::Theory,
            1,
        )
        .unwrap();
        let mut buf = Vec::new();
        d.write_svg(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains("fill=\"#808080\""));
    }

    #[test]
    fn red_boundary_nonincreasing_in_beta1() {
        let grid = GridSpec {
            beta1_range: (0.0, 0.9),
            beta2_range: (0.0, 1.5),
            resolution: (10, 2),
        };
        let d = sweep(
            &worked_template(),
            &grid,
            &IntegratorConfig::default(),
            SweepMode::Theory,
            1,
        )
        .unwrap();
        assert!(!d.boundaries.red.is_empty());
        for w in d.boundaries.red.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-9);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec {
            beta1_range: (0.5, 0.1),
            beta2_range: (0.0, 1.0),
            resolution: (3, 3),
        }
        .validate()
        .is_err());
        assert!(GridSpec {
            beta1_range: (0.5, 0.5),
            beta2_range: (1.0, 1.0),
            resolution: (1, 1),
        }
        .validate()
        .is_ok());
    }
}
