"""Handcrafted multimodal features and softmax regression for meme affect classification."""

__version__ = "0.1.0"
