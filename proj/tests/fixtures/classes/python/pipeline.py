import subprocess

subprocess.run(['fastqc', 'reads.fq'])
