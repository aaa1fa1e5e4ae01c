"""Core modules for the KANO blind super-resolution tools"""
