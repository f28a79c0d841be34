"""Image containers, palette handling and PNG I/O."""
