//! ROC-space geometry: curves built from score groups, iso-loss lines, the
//! budget constraint line and cost-optimal operating points.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grouping::LeafGrouping;
use crate::scalar::Scalar;
use crate::types::{BudgetSpec, CostMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint<T> {
    pub fpr: T,
    pub tpr: T,
}

impl<T: Scalar> RocPoint<T> {
    pub fn new(fpr: T, tpr: T) -> Self {
        Self { fpr, tpr }
    }

    /// Expected number of predicted positives at this operating point.
    pub fn predicted_positive(&self, n_pos: usize, n_neg: usize) -> T {
        self.fpr * T::from_count(n_neg) + self.tpr * T::from_count(n_pos)
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.fpr.approx_eq(other.fpr) && self.tpr.approx_eq(other.tpr)
    }
}

/// Piecewise-linear ROC curve from `(0, 0)` to `(1, 1)`, one vertex per group.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve<T> {
    pub points: Vec<RocPoint<T>>,
    pub n_pos: usize,
    pub n_neg: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line<T> {
    pub slope: T,
    pub intercept: T,
}

impl<T: Scalar> Line<T> {
    pub fn at(&self, fpr: T) -> T {
        self.slope * fpr + self.intercept
    }
}

/// Sweeps groups in descending score order, accumulating true and false positives.
pub fn roc_curve<T: Scalar>(grouping: &LeafGrouping<T>, labels: &[bool]) -> Result<RocCurve<T>> {
    let positives = grouping.positives_per_group(labels)?;
    let n_pos: usize = positives.iter().sum();
    let n_neg = grouping.n_instances() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateData("ROC curve needs both classes".into()));
    }
    let mut points = vec![RocPoint::new(T::zero(), T::zero())];
    let (mut tp, mut fp) = (0usize, 0usize);
    for (g, &pos) in grouping.groups().iter().zip(&positives) {
        tp += pos;
        fp += g.size() - pos;
        points.push(RocPoint::new(
            T::from_count(fp) / T::from_count(n_neg),
            T::from_count(tp) / T::from_count(n_pos),
        ));
    }
    Ok(RocCurve { points, n_pos, n_neg })
}

/// Total loss at an ROC operating point.
pub fn loss_at<T: Scalar>(point: &RocPoint<T>, costs: &CostMatrix<T>, n_pos: usize, n_neg: usize) -> T {
    let pos = T::from_count(n_pos);
    let neg = T::from_count(n_neg);
    costs.c01 * (T::one() - point.tpr) * pos
        + costs.c10 * point.fpr * neg
        + costs.c11 * point.tpr * pos
        + costs.c00 * (T::one() - point.fpr) * neg
}

fn need_positives(n_pos: usize) -> Result<()> {
    if n_pos == 0 {
        return Err(Error::DegenerateData("no actual positives".into()));
    }
    Ok(())
}

/// Points of equal total `loss` for canonical costs.
pub fn iso_loss_line<T: Scalar>(costs: &CostMatrix<T>, n_pos: usize, n_neg: usize, loss: T) -> Result<Line<T>> {
    need_positives(n_pos)?;
    if !costs.is_canonical() {
        return Err(Error::InvalidInput("iso-loss lines need a zero-diagonal cost matrix".into()));
    }
    if costs.c01 <= T::zero() {
        return Err(Error::DegenerateCost("false-negative cost must be positive".into()));
    }
    let fn_mass = costs.c01 * T::from_count(n_pos);
    Ok(Line {
        slope: costs.c10 * T::from_count(n_neg) / fn_mass,
        intercept: T::one() - loss / fn_mass,
    })
}

/// Points predicting exactly `budget.limit` positives.
pub fn constraint_line<T: Scalar>(n_pos: usize, n_neg: usize, budget: &BudgetSpec) -> Result<Line<T>> {
    need_positives(n_pos)?;
    let pos = T::from_count(n_pos);
    Ok(Line {
        slope: T::zero() - T::from_count(n_neg) / pos,
        intercept: T::from_count(budget.limit) / pos,
    })
}

/// First point where the curve meets `line`, interpolating along a segment.
pub fn intersect<T: Scalar>(curve: &RocCurve<T>, line: &Line<T>) -> Result<RocPoint<T>> {
    let gap = |p: &RocPoint<T>| p.tpr - line.at(p.fpr);
    let zero = T::zero();
    for w in curve.points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (ga, gb) = (gap(a), gap(b));
        if ga.approx_eq(zero) {
            return Ok(*a);
        }
        if gb.approx_eq(zero) {
            return Ok(*b);
        }
        if (ga < zero) != (gb < zero) {
            let t = ga / (ga - gb);
            return Ok(RocPoint::new(a.fpr + t * (b.fpr - a.fpr), a.tpr + t * (b.tpr - a.tpr)));
        }
    }
    Err(Error::Geometry(format!(
        "line tpr = {} * fpr + {} does not meet the curve inside the unit square",
        line.slope, line.intercept
    )))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint<T> {
    pub point: RocPoint<T>,
    pub loss: T,
}

/// Minimum-loss operating point over the curve vertices. With a budget, only
/// vertices on or below the constraint line count, and the curve's crossing
/// of that line is added as a candidate.
pub fn optimal_point<T: Scalar>(
    curve: &RocCurve<T>,
    costs: &CostMatrix<T>,
    budget: Option<&BudgetSpec>,
) -> Result<OperatingPoint<T>> {
    let (n_pos, n_neg) = (curve.n_pos, curve.n_neg);
    let mut candidates: Vec<RocPoint<T>> = match budget {
        None => curve.points.clone(),
        Some(b) => {
            let limit = T::from_count(b.limit) + T::tolerance();
            curve
                .points
                .iter()
                .copied()
                .filter(|p| p.predicted_positive(n_pos, n_neg) <= limit)
                .collect()
        }
    };
    if let Some(b) = budget {
        if let Ok(p) = intersect(curve, &constraint_line(n_pos, n_neg, b)?) {
            candidates.push(p);
        }
    }
    let mut best: Option<OperatingPoint<T>> = None;
    for point in candidates {
        let loss = loss_at(&point, costs, n_pos, n_neg);
        if best.is_none_or(|b| loss < b.loss) {
            best = Some(OperatingPoint { point, loss });
        }
    }
    best.ok_or_else(|| Error::Infeasible("no curve point satisfies the budget".into()))
}

/// Lowest cost any labelling with exactly `budget.limit` positives can reach.
pub fn min_feasible_cost<T: Scalar>(n_pos: usize, budget: &BudgetSpec, costs: &CostMatrix<T>) -> T {
    if n_pos >= budget.limit {
        costs.c01 * T::from_count(n_pos - budget.limit)
    } else {
        costs.c10 * T::from_count(budget.limit - n_pos)
    }
}

pub fn write_curves<T: Scalar, W: Write>(out: W, series: &[(&str, &RocCurve<T>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["series", "fpr", "tpr"])?;
    for (name, curve) in series {
        for p in &curve.points {
            w.write_record([name.to_string(), p.fpr.to_string(), p.tpr.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<curves>", e))?;
    Ok(())
}

pub fn write_lines<T: Scalar, W: Write>(out: W, lines: &[(&str, Line<T>, Option<T>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["series", "slope", "intercept", "loss"])?;
    for (name, line, loss) in lines {
        w.write_record([
            name.to_string(),
            line.slope.to_string(),
            line.intercept.to_string(),
            loss.map(|l| l.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<lines>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use num_rational::Ratio;

    use super::*;

    type Q = Ratio<i64>;

    fn q(n: i64, d: i64) -> Q {
        Ratio::new(n, d)
    }

    fn grouping_with_labels(groups: &[(f64, usize, usize)]) -> (LeafGrouping<f64>, Vec<bool>) {
        let scores: Vec<f64> = groups.iter().map(|g| g.0).collect();
        let sizes: Vec<usize> = groups.iter().map(|g| g.1).collect();
        let grouping = LeafGrouping::from_sizes(&scores, &sizes).unwrap();
        let mut labels = Vec::new();
        for &(_, size, pos) in groups {
            labels.extend((0..size).map(|i| i < pos));
        }
        (grouping, labels)
    }

    fn model_a_curve() -> RocCurve<Q> {
        RocCurve {
            points: vec![
                RocPoint::new(q(0, 1), q(0, 1)),
                RocPoint::new(q(120, 900), q(4, 5)),
                RocPoint::new(q(1, 1), q(1, 1)),
            ],
            n_pos: 100,
            n_neg: 900,
        }
    }

    fn running_costs() -> CostMatrix<Q> {
        CostMatrix::canonical(q(19, 1), q(1, 1)).unwrap()
    }

    #[test]
    fn curve_from_groups() {
        let (g, labels) = grouping_with_labels(&[(0.8, 5, 4), (0.3, 5, 1)]);
        let c = roc_curve(&g, &labels).unwrap();
        let pts: Vec<(f64, f64)> = c.points.iter().map(|p| (p.fpr, p.tpr)).collect();
        assert_eq!(pts, vec![(0.0, 0.0), (0.2, 0.8), (1.0, 1.0)]);
    }

    #[test]
    fn perfect_and_uninformative_curves() {
        let (g, labels) = grouping_with_labels(&[(0.9, 3, 3), (0.1, 4, 0)]);
        let pts: Vec<(f64, f64)> = roc_curve(&g, &labels).unwrap().points.iter().map(|p| (p.fpr, p.tpr)).collect();
        assert_eq!(pts, vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);

        let (g, labels) = grouping_with_labels(&[(0.5, 6, 3)]);
        assert_eq!(roc_curve(&g, &labels).unwrap().points.len(), 2);

        let (g, labels) = grouping_with_labels(&[(0.5, 6, 0)]);
        assert!(matches!(roc_curve(&g, &labels), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn iso_loss_slopes_and_intercepts() {
        let line = iso_loss_line(&running_costs(), 100, 900, q(0, 1)).unwrap();
        assert_eq!(line.slope, q(900, 1900));
        let through_origin = iso_loss_line(&running_costs(), 100, 900, q(1900, 1)).unwrap();
        assert_eq!(through_origin.intercept, q(0, 1));
        let l500 = iso_loss_line(&running_costs(), 100, 900, q(500, 1)).unwrap();
        assert_eq!(l500.at(q(120, 900)), q(4, 5));
    }

    #[test]
    fn constraint_lines() {
        let b = BudgetSpec::new(100, 1000).unwrap();
        let l: Line<Q> = constraint_line(100, 900, &b).unwrap();
        assert_eq!((l.slope, l.intercept), (q(-9, 1), q(1, 1)));
        let full: Line<Q> = constraint_line(100, 900, &BudgetSpec::new(1000, 1000).unwrap()).unwrap();
        assert_eq!(full.at(q(1, 1)), q(1, 1));
        let empty: Line<Q> = constraint_line(100, 900, &BudgetSpec::new(0, 1000).unwrap()).unwrap();
        assert_eq!(empty.at(q(0, 1)), q(0, 1));
    }

    #[test]
    fn running_example_intersection() {
        let b = BudgetSpec::new(100, 1000).unwrap();
        let p = intersect(&model_a_curve(), &constraint_line(100, 900, &b).unwrap()).unwrap();
        assert_eq!(p, RocPoint::new(q(60, 900), q(2, 5)));
    }

    #[test]
    fn intersection_at_shared_endpoint_and_diagonal() {
        let full = constraint_line(100, 900, &BudgetSpec::new(1000, 1000).unwrap()).unwrap();
        assert_eq!(intersect(&model_a_curve(), &full).unwrap(), RocPoint::new(q(1, 1), q(1, 1)));

        let diagonal = RocCurve {
            points: vec![RocPoint::new(q(0, 1), q(0, 1)), RocPoint::new(q(1, 1), q(1, 1))],
            n_pos: 1,
            n_neg: 1,
        };
        let line = Line {
            slope: q(-3, 1),
            intercept: q(1, 2),
        };
        let p = intersect(&diagonal, &line).unwrap();
        assert_eq!(p.fpr, q(1, 2) / (q(1, 1) - q(-3, 1)));
    }

    #[test]
    fn line_outside_square_is_a_geometry_error() {
        let line = Line {
            slope: q(-1, 1),
            intercept: q(5, 1),
        };
        assert!(matches!(intersect(&model_a_curve(), &line), Err(Error::Geometry(_))));
    }

    #[test]
    fn optimal_points() {
        let unconstrained = optimal_point(&model_a_curve(), &running_costs(), None).unwrap();
        assert_eq!(unconstrained.point, RocPoint::new(q(120, 900), q(4, 5)));
        assert_eq!(unconstrained.loss, q(500, 1));

        let b = BudgetSpec::new(100, 1000).unwrap();
        let feasible = optimal_point(&model_a_curve(), &running_costs(), Some(&b)).unwrap();
        assert_eq!(feasible.point, RocPoint::new(q(60, 900), q(2, 5)));
        assert_eq!(feasible.loss, q(1200, 1));

        let perfect = RocCurve {
            points: vec![
                RocPoint::new(q(0, 1), q(0, 1)),
                RocPoint::new(q(0, 1), q(1, 1)),
                RocPoint::new(q(1, 1), q(1, 1)),
            ],
            n_pos: 100,
            n_neg: 900,
        };
        let best = optimal_point(&perfect, &running_costs(), None).unwrap();
        assert_eq!((best.point.fpr, best.point.tpr, best.loss), (q(0, 1), q(1, 1), q(0, 1)));
    }

    #[test]
    fn minimum_feasible_costs() {
        let c = CostMatrix::canonical(19.0, 1.0).unwrap();
        let b = |limit| BudgetSpec::new(limit, 1000).unwrap();
        assert_eq!(min_feasible_cost(100, &b(100), &c), 0.0);
        assert_eq!(min_feasible_cost(100, &b(80), &c), 380.0);
        assert_eq!(min_feasible_cost(100, &b(150), &c), 50.0);
    }

    #[test]
    fn export_formats() {
        let mut buf = Vec::new();
        write_lines(&mut buf, &[("iso", Line { slope: 0.5, intercept: 0.25 }, Some(10.0))]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "series,slope,intercept,loss\niso,0.5,0.25,10\n");
    }
}
