"""panosynth - panoramic semantic-segmentation dataset synthesis from four-camera rigs."""

__version__ = "0.1.0"
