use crate::error::{Error, Result};
use crate::exec::{map_indexed, Exec};
use crate::infoflow::{filter_expect, sample_information, InformationPath, XFactor};
use crate::probspace::TimeGrid;
use crate::rng::stream_rng;

/// Independent information paths for one factor. Path `p` draws from the
/// stream `(seed, factor_id, p)`, so the ensemble does not depend on the
/// execution strategy.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub factor: XFactor,
    pub sigma: f64,
    pub times: Vec<f64>,
    pub paths: Vec<InformationPath>,
}

pub fn simulate_ensemble(
    factor: &XFactor,
    sigma: f64,
    grid: &TimeGrid,
    paths: usize,
    seed: u64,
    factor_id: u64,
    exec: Exec,
) -> Result<Ensemble> {
    let sampled = map_indexed(paths, exec, |p| sample_information(factor, sigma, grid, &mut stream_rng(seed, factor_id, p as u64)));
    let paths = sampled.into_iter().collect::<Result<Vec<_>>>()?;
    let times = grid.times()[..=factor.reveal_index].to_vec();
    Ok(Ensemble { factor: factor.clone(), sigma, times, paths })
}

impl Ensemble {
    pub fn reveal_index(&self) -> usize {
        self.factor.reveal_index
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Filtered value of `f` at every index of every path. At the reveal
    /// index the factor is known and the value is `f(X)`.
    pub fn filtered<F>(&self, f: F, exec: Exec) -> Result<Vec<Vec<f64>>>
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let j = self.reveal_index();
        let tj = self.times[j];
        let rows = map_indexed(self.paths.len(), exec, |p| {
            let path = &self.paths[p];
            let mut row = Vec::with_capacity(j + 1);
            for i in 0..j {
                row.push(filter_expect(&f, &self.factor, path.xi[i], self.sigma, self.times[i], tj)?);
            }
            row.push(f(path.x));
            Ok(row)
        });
        rows.into_iter().collect()
    }

    /// Filtered values at a single index `i < j`.
    pub fn filtered_at<F>(&self, f: F, i: usize, exec: Exec) -> Result<Vec<f64>>
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let j = self.reveal_index();
        if i >= j {
            return Err(Error::IndexOutOfRange { index: i, lo: 0, hi: j - 1 });
        }
        let (ti, tj) = (self.times[i], self.times[j]);
        let vals = map_indexed(self.paths.len(), exec, |p| filter_expect(&f, &self.factor, self.paths[p].xi[i], self.sigma, ti, tj));
        vals.into_iter().collect()
    }
}
