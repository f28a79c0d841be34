"""Dataset synthesis: sequence discovery, the batch pipeline and its manifest."""
