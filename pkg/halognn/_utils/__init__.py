from halognn._utils.math import distribute_integers, equitable_split, prioritize, relative_deviation, split_offsets
