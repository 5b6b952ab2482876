//! Eigensystems shared across sweep points, keyed by a fingerprint of the
//! Hamiltonian. Readers take the shared lock; a miss computes outside any
//! lock and inserts under the write lock.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, RwLock};

use tlsim_core::oracle::{exact_eigensystem_capped, EigenSystem};
use tlsim_core::DenseOperator;

#[derive(Debug, Default)]
pub struct EigenCache {
    entries: RwLock<HashMap<u64, Arc<EigenSystem>>>,
}

impl EigenCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compute(&self, h: &DenseOperator, cap: usize) -> tlsim_core::Result<Arc<EigenSystem>> {
        let key = fingerprint(h);
        if let Some(hit) = self.entries.read().expect("eigen cache poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let eig = Arc::new(exact_eigensystem_capped(h, cap)?);
        let mut map = self.entries.write().expect("eigen cache poisoned");
        Ok(Arc::clone(map.entry(key).or_insert(eig)))
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("eigen cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Hash of the dimension and the bit patterns of every entry.
pub fn fingerprint(h: &DenseOperator) -> u64 {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    h.dim().hash(&mut hasher);
    for z in h.matrix().iter() {
        z.re.to_bits().hash(&mut hasher);
        z.im.to_bits().hash(&mut hasher);
    }
    hasher.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use tlsim_core::hilbert::build_h_single;
    use tlsim_core::{FockBasis, ModelParams};

    #[test]
    fn hits_reuse_entries() {
        let cache = EigenCache::new();
        let fock = FockBasis::new(5).unwrap();
        let h = build_h_single(&ModelParams::single(1.0, 0.3, 0.1), fock).unwrap();
        let a = cache.get_or_compute(&h, 4096).unwrap();
        let b = cache.get_or_compute(&h, 4096).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let h2 = build_h_single(&ModelParams::single(1.0, 0.31, 0.1), fock).unwrap();
        cache.get_or_compute(&h2, 4096).unwrap();
        assert_eq!(cache.len(), 2);
    }
}
