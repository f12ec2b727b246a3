//! Script loading with transitive imports.
//!
//! An import is looked up relative to the importing file's directory, then in
//! each include path, then among the files shipped with the library. Every
//! file is loaded at most once; a file that (transitively) imports itself is
//! an error.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use super::ast::SurfaceModule;
use super::error::FrontendError;
use super::lexer::tokenize;
use super::parser::parse_module;

pub const PRELUDE_NAME: &str = "prelude.eg";
pub const PRELUDE_SOURCE: &str = include_str!("../../prelude/prelude.eg");

const SHIPPED: &[(&str, &str)] = &[(PRELUDE_NAME, PRELUDE_SOURCE)];

enum Located {
    File(PathBuf),
    Shipped(&'static str, &'static str),
}

impl Located {
    fn id(&self) -> String {
        match self {
            Located::File(p) => p.display().to_string(),
            Located::Shipped(name, _) => format!("<shipped>/{name}"),
        }
    }
}

/// Accumulates parsed modules in dependency order.
#[derive(Default)]
pub struct Loader {
    include_paths: Vec<PathBuf>,
    modules: Vec<SurfaceModule>,
    done: HashSet<String>,
    active: Vec<String>,
}

pub fn parse_source(source: &str) -> Result<SurfaceModule, FrontendError> {
    parse_module(&tokenize(source)?)
}

impl Loader {
    pub fn new(include_paths: Vec<PathBuf>) -> Self {
        Loader {
            include_paths,
            ..Default::default()
        }
    }

    pub fn modules(&self) -> &[SurfaceModule] {
        &self.modules
    }

    pub fn into_modules(self) -> Vec<SurfaceModule> {
        self.modules
    }

    fn locate(&self, name: &str, base: Option<&Path>) -> Option<Located> {
        let direct = Path::new(name);
        let mut candidates: Vec<PathBuf> = Vec::new();
        if direct.is_absolute() {
            candidates.push(direct.to_path_buf());
        } else {
            candidates.extend(base.map(|b| b.join(name)));
            candidates.extend(self.include_paths.iter().map(|p| p.join(name)));
        }
        if let Some(found) = candidates.into_iter().find(|c| c.is_file()) {
            return Some(Located::File(found.canonicalize().unwrap_or(found)));
        }
        SHIPPED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|&(n, src)| Located::Shipped(n, src))
    }

    /// Loads a script file and everything it imports.
    pub fn load_file(&mut self, path: &Path) -> Result<(), FrontendError> {
        let path = path.canonicalize().map_err(|source| FrontendError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.load(Located::File(path))
    }

    /// Loads source text that does not come from a file (a REPL line, a test
    /// fixture). Imports resolve against `base`.
    pub fn load_source(
        &mut self,
        name: &str,
        source: &str,
        base: Option<&Path>,
    ) -> Result<(), FrontendError> {
        let module = parse_source(source).map_err(|e| in_file(name, e))?;
        self.active.push(name.to_string());
        let result = self.load_imports(&module, base);
        self.active.pop();
        result?;
        self.modules.push(module);
        Ok(())
    }

    fn load(&mut self, located: Located) -> Result<(), FrontendError> {
        let id = located.id();
        if self.done.contains(&id) {
            return Ok(());
        }
        if let Some(start) = self.active.iter().position(|a| *a == id) {
            let mut chain = self.active[start..].to_vec();
            chain.push(id);
            return Err(FrontendError::ImportCycle { chain });
        }
        let (source, base) = match &located {
            Located::File(path) => (
                std::fs::read_to_string(path).map_err(|source| FrontendError::Io {
                    path: path.clone(),
                    source,
                })?,
                path.parent().map(Path::to_path_buf),
            ),
            Located::Shipped(_, src) => (src.to_string(), None),
        };
        let module = parse_source(&source).map_err(|e| in_file(&id, e))?;
        self.active.push(id.clone());
        let result = self.load_imports(&module, base.as_deref());
        self.active.pop();
        result?;
        self.done.insert(id);
        self.modules.push(module);
        Ok(())
    }

    fn load_imports(
        &mut self,
        module: &SurfaceModule,
        base: Option<&Path>,
    ) -> Result<(), FrontendError> {
        for import in &module.imports {
            let located = self
                .locate(import, base)
                .ok_or_else(|| FrontendError::ImportNotFound {
                    name: import.clone(),
                })?;
            self.load(located)?;
        }
        Ok(())
    }
}

fn in_file(file: &str, e: FrontendError) -> FrontendError {
    match e {
        e @ (FrontendError::Lex { .. }
        | FrontendError::Syntax { .. }
        | FrontendError::Unbalanced { .. }) => FrontendError::InFile {
            file: file.to_string(),
            source: Box::new(e),
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn scratch(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("twistvm-loader-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn shipped_prelude_is_found() {
        let mut loader = Loader::default();
        loader
            .load_source("main", "import \"prelude.eg\" def main = 1", None)
            .unwrap();
        assert_eq!(loader.modules().len(), 2);
    }

    #[test]
    fn each_file_loads_once() {
        let dir = scratch("once");
        fs::write(dir.join("a.eg"), "import \"c.eg\" def a = 1").unwrap();
        fs::write(dir.join("b.eg"), "import \"c.eg\" def b = 2").unwrap();
        fs::write(dir.join("c.eg"), "def c = 3").unwrap();
        fs::write(dir.join("main.eg"), "import \"a.eg\" import \"b.eg\" def main = 0").unwrap();
        let mut loader = Loader::default();
        loader.load_file(&dir.join("main.eg")).unwrap();
        assert_eq!(loader.modules().len(), 4);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn import_cycle_is_an_error() {
        let dir = scratch("cycle");
        fs::write(dir.join("a.eg"), "import \"b.eg\"").unwrap();
        fs::write(dir.join("b.eg"), "import \"a.eg\"").unwrap();
        let mut loader = Loader::default();
        let err = loader.load_file(&dir.join("a.eg")).unwrap_err();
        assert!(matches!(err, FrontendError::ImportCycle { ref chain } if chain.len() == 3));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn include_paths_are_searched() {
        let dir = scratch("include");
        let lib = dir.join("lib");
        fs::create_dir_all(&lib).unwrap();
        fs::write(lib.join("util.eg"), "def util = 1").unwrap();
        let mut loader = Loader::new(vec![lib]);
        loader
            .load_source("main", "import \"util.eg\" def main = util", Some(&dir))
            .unwrap();
        assert_eq!(loader.modules().len(), 2);
        let mut bare = Loader::default();
        let err = bare
            .load_source("main", "import \"util.eg\"", Some(&dir))
            .unwrap_err();
        assert!(matches!(err, FrontendError::ImportNotFound { .. }));
        fs::remove_dir_all(dir).unwrap();
    }
}
