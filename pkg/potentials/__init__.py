from potentials.gaussian_well import RealGaussianWell, RealGaussianWellConfig
from potentials.imaginary_linear import ImaginaryLinear, ImaginaryLinearConfig
from potentials.complex_absorbing import ComplexAbsorbing, ComplexAbsorbingConfig
from potentials.nonlocal_separable import NonlocalSeparable, NonlocalSeparableConfig
from potentials.matrix_file import MatrixFile, MatrixFileConfig
from potentials.two_level_pt import TwoLevelPT, TwoLevelPTConfig
