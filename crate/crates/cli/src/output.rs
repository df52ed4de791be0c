use std::io;
use std::path::Path;

/// Writes every file or none: existing targets abort the whole batch unless
/// `force` is set.
pub fn write_all(dir: &Path, files: &[(String, String)], force: bool) -> io::Result<()> {
    if files.is_empty() {
        return Ok(());
    }
    if !force {
        if let Some((name, _)) = files.iter().find(|(name, _)| dir.join(name).exists()) {
            return Err(io::Error::new(
                io::ErrorKind::AlreadyExists,
                format!(
                    "{} exists; pass --force to overwrite",
                    dir.join(name).display()
                ),
            ));
        }
    }
    std::fs::create_dir_all(dir)?;
    for (name, body) in files {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}
