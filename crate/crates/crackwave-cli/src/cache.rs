//! On-disk cache of eigenvalue searches, keyed by the exact bits of every input.

use std::path::{Path, PathBuf};

use crackwave::spectral::{EigenResult, Route};

use crate::output::{class_slug, write_file};

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(out: &Path, enabled: bool) -> Self {
        Self { dir: enabled.then(|| out.join("cache")) }
    }

    fn path(&self, label: &str, ell: f64, n: usize, route: Route, tol: f64) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| {
            d.join(format!("{}-{:016x}-{n}-{route}-{:016x}.json", class_slug(label), ell.to_bits(), tol.to_bits()))
        })
    }

    pub fn get(&self, label: &str, ell: f64, n: usize, route: Route, tol: f64) -> Option<EigenResult> {
        let p = self.path(label, ell, n, route, tol)?;
        let text = std::fs::read_to_string(p).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// Best effort: a failed write only costs a recomputation later.
    pub fn put(&self, label: &str, r: &EigenResult, tol: f64) {
        if let Some(p) = self.path(label, r.ell, r.n, r.route, tol) {
            if let Ok(text) = serde_json::to_string(r) {
                let _ = write_file(&p, text.as_bytes());
            }
        }
    }
}
