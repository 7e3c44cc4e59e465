//! Seeded random instance builders.
//!
//! Everything here is deterministic given the seed, so randomized suites can
//! report the seed they ran with and be replayed exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csystem::{Context, Morph, Section};
use crate::monad::{Assignment, ModuleOps, MonadOps};
use crate::value::{LMTerm, RTerm};

/// A seeded source of random terms, contexts, and morphisms.
///
/// Builders return `None` when the requested set is empty at the given
/// bounds (for example arity-0 terms of the identity monad); callers retry
/// with different parameters.
#[derive(Debug, Clone)]
pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Uniform in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    pub fn rterm(&mut self, monad: &dyn MonadOps, arity: usize, max_size: usize) -> Option<RTerm> {
        monad.sample(&mut self.rng, arity, max_size)
    }

    pub fn lmterm(
        &mut self,
        module: &dyn ModuleOps,
        arity: usize,
        max_size: usize,
    ) -> Option<LMTerm> {
        module.sample(&mut self.rng, arity, max_size)
    }

    pub fn assignment(
        &mut self,
        monad: &dyn MonadOps,
        source_arity: usize,
        target_arity: usize,
        max_size: usize,
    ) -> Option<Assignment> {
        let mut components = Vec::with_capacity(source_arity);
        for _ in 0..source_arity {
            components.push(self.rterm(monad, target_arity, max_size)?);
        }
        Some(Assignment::new(source_arity, target_arity, components))
    }

    pub fn context(
        &mut self,
        module: &dyn ModuleOps,
        len: usize,
        max_size: usize,
    ) -> Option<Context> {
        let mut entries = Vec::with_capacity(len);
        for i in 0..len {
            entries.push(self.lmterm(module, i, max_size)?);
        }
        Context::new(entries).ok()
    }

    /// A random section over the given context.
    pub fn section(
        &mut self,
        module: &dyn ModuleOps,
        ctx: &Context,
        max_size: usize,
    ) -> Option<Section> {
        let ty = self.lmterm(module, ctx.len(), max_size)?;
        let tm = self.rterm(module.monad().as_ref(), ctx.len(), max_size)?;
        Section::new(ctx.clone(), ty, tm).ok()
    }

    /// A random morphism between the given contexts (raw components, not
    /// necessarily a hom of any particular subsystem).
    pub fn morph(
        &mut self,
        monad: &dyn MonadOps,
        dom: &Context,
        cod: &Context,
        max_size: usize,
    ) -> Option<Morph> {
        let mut comps = Vec::with_capacity(cod.len());
        for _ in 0..cod.len() {
            comps.push(self.rterm(monad, dom.len(), max_size)?);
        }
        Morph::new(dom.clone(), cod.clone(), comps).ok()
    }

    /// Pick a uniformly random element of a nonempty slice.
    pub fn pick<'a, T>(&mut self, xs: &'a [T]) -> Option<&'a T> {
        if xs.is_empty() {
            None
        } else {
            let i = self.index(xs.len());
            Some(&xs[i])
        }
    }
}
