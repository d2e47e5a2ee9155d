//! Named mesh generators, selected at runtime from configuration.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::mesh::{self, DomainTag, Mesh, MeshError};

/// Geometric parameters a generator may consult. Generators ignore the
/// fields they do not need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainArgs {
    pub width: f64,
    pub height: f64,
}

impl Default for DomainArgs {
    fn default() -> Self {
        DomainArgs {
            width: 1.0,
            height: 1.0,
        }
    }
}

pub trait MeshGenerator: Send + Sync {
    fn name(&self) -> &'static str;

    fn tag(&self) -> DomainTag;

    fn generate(&self, args: &DomainArgs, refinements: u32) -> Result<Mesh, MeshError>;
}

pub struct Disk;

impl MeshGenerator for Disk {
    fn name(&self) -> &'static str {
        "disk"
    }

    fn tag(&self) -> DomainTag {
        DomainTag::Disk
    }

    fn generate(&self, _args: &DomainArgs, refinements: u32) -> Result<Mesh, MeshError> {
        Ok(mesh::generate_disk(refinements))
    }
}

pub struct Rectangle;

impl MeshGenerator for Rectangle {
    fn name(&self) -> &'static str {
        "rectangle"
    }

    fn tag(&self) -> DomainTag {
        DomainTag::Rectangle
    }

    fn generate(&self, args: &DomainArgs, refinements: u32) -> Result<Mesh, MeshError> {
        mesh::generate_rectangle(args.width, args.height, refinements)
    }
}

pub struct LShape;

impl MeshGenerator for LShape {
    fn name(&self) -> &'static str {
        "lshape"
    }

    fn tag(&self) -> DomainTag {
        DomainTag::Lshape
    }

    fn generate(&self, _args: &DomainArgs, refinements: u32) -> Result<Mesh, MeshError> {
        Ok(mesh::generate_lshape(refinements))
    }
}

pub struct DomainRegistry {
    generators: BTreeMap<&'static str, Arc<dyn MeshGenerator>>,
}

impl DomainRegistry {
    pub fn empty() -> Self {
        DomainRegistry {
            generators: BTreeMap::new(),
        }
    }

    /// Registry holding `disk`, `rectangle` and `lshape`.
    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(Disk));
        registry.register(Arc::new(Rectangle));
        registry.register(Arc::new(LShape));
        registry
    }

    /// Registers a generator, replacing any previous one with the same name.
    pub fn register(&mut self, generator: Arc<dyn MeshGenerator>) {
        self.generators.insert(generator.name(), generator);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn MeshGenerator>, MeshError> {
        self.generators
            .get(name)
            .cloned()
            .ok_or_else(|| MeshError::UnknownDomain(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.generators.keys().copied()
    }

    pub fn generate(&self, name: &str, args: &DomainArgs, refinements: u32) -> Result<Mesh, MeshError> {
        self.get(name)?.generate(args, refinements)
    }
}

impl Default for DomainRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
