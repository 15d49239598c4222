"""Paired photo/sketch data: synthetic generation, PNG codec and directory loading."""
from .dataset import Dataset, ImagePair, to_signed, to_unit
from .loader import PairedDirReader, load_dataset, load_paired_dir, save_dataset
from .png import png_decode, png_encode, read_png, write_png
from .shapes import ShapeFactory
from .synthetic import gen_synthetic_pair, gen_synthetic_pairs
