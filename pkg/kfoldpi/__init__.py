from kfoldpi.pipeline import Step, Pipeline, DataWriteConfig
from kfoldpi.data import Dataset

__version__ = "0.1.0"
